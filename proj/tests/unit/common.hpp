#pragma once

#include <string>
#include <vector>

#include "dsuedhi/equilibrium.hpp"
#include "dsuedhi/network.hpp"
#include "dsuedhi/paths.hpp"
#include "dsuedhi_cli/scenario.hpp"

namespace testing_support {

inline std::string data_path(const std::string& rel) { return std::string(DSUEDHI_DATA_DIR) + "/" + rel; }

inline dsuedhi::LinkRecord link(std::string id, std::string tail, std::string head, double ff_s,
                                double cap, double speed = 10.0, double wave = 5.0,
                                double jam = 0.15) {
  return {std::move(id), std::move(tail), std::move(head), ff_s * speed, speed, wave, cap, jam};
}

/// Three-link corridor: links 1 and 2 from A to B, link 3 from B to C.
inline dsuedhi::Network corridor(double d_instant = 6, double d_forecast = 6, double ta = 1800) {
  std::vector<dsuedhi::LinkRecord> links = {link("1", "A", "B", 120, 0.5),
                                            link("2", "A", "B", 150, 0.5),
                                            link("3", "B", "C", 200, 0.25)};
  std::vector<dsuedhi::DemandRecord> demand = {{"A", "C", d_instant, d_forecast, ta, {}},
                                               {"B", "C", d_instant, d_forecast, ta, {}}};
  return dsuedhi::validate_network({}, links, demand);
}

inline dsuedhi::Problem corridor_problem(double d_instant, double d_forecast, double horizon = 3600,
                                     double interval = 120, dsuedhi::ChoiceParams params = {}) {
  auto net = corridor(d_instant, d_forecast, horizon / 2);
  auto paths = dsuedhi::enumerate_all_paths(net, {});
  return dsuedhi::Problem(std::move(net), std::move(paths), dsuedhi::TimeGrid(horizon, interval),
                          params);
}

inline dsuedhi::Problem scenario_problem(const std::string& rel) {
  return dsuedhi::cli::build_problem(dsuedhi::cli::load_scenario(data_path(rel)));
}

}  // namespace testing_support
