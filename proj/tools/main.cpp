#include <iostream>

#include "dsuedhi_cli/runner.hpp"

int main(int argc, char** argv) {
  return dsuedhi::cli::main_cli(argc, argv, std::cout, std::cerr);
}
