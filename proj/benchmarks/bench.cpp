#include <benchmark/benchmark.h>

#include <string>

#include "dsuedhi/equilibrium.hpp"
#include "dsuedhi_cli/scenario.hpp"

using namespace dsuedhi;

namespace {

const Problem& problem(const std::string& rel) {
  static const Problem corridor =
      cli::build_problem(cli::load_scenario(std::string(DSUEDHI_DATA_DIR) + "/corridor/scenario.ini"));
  static const Problem grid =
      cli::build_problem(cli::load_scenario(std::string(DSUEDHI_DATA_DIR) + "/grid/congested.ini"));
  return rel == "corridor" ? corridor : grid;
}

void BM_Load(benchmark::State& state, const char* name) {
  const auto& p = problem(name);
  const Matrix h = initial_departures(p, InitPolicy::FreeFlow).total();
  for (auto _ : state) benchmark::DoNotOptimize(p.loader().load(h));
}

void BM_Map(benchmark::State& state, const char* name) {
  const auto& p = problem(name);
  const auto h = initial_departures(p, InitPolicy::FreeFlow);
  ExecutionOptions exec;
  exec.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fixed_point_map(p, h, exec));
}

void BM_Solve(benchmark::State& state, const char* name) {
  const auto& p = problem(name);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sram(p, {}));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Load, corridor, "corridor")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Load, grid, "grid")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Map, corridor, "corridor")->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Map, grid, "grid")->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, corridor, "corridor")->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
