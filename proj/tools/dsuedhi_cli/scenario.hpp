#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dsuedhi/choice.hpp"
#include "dsuedhi/dnl.hpp"
#include "dsuedhi/equilibrium.hpp"
#include "dsuedhi/metrics.hpp"
#include "dsuedhi/paths.hpp"

namespace dsuedhi::cli {

/// One experiment. Read from an INI-style file:
///
///   [section]
///   key = value
///
/// Relative file paths are resolved against the scenario file's directory.
/// Every key can be overridden through DSUEDHI_<SECTION>_<KEY>.
struct Scenario {
  std::string id = "scenario";
  std::filesystem::path network;
  std::filesystem::path demand;
  std::filesystem::path paths;  // optional explicit path list
  std::filesystem::path output = "out";

  double horizon_s = 3600.0;
  double interval_s = 120.0;

  ChoiceParams choice;
  /// Re-splits every OD's demand so this share gets instantaneous information.
  std::optional<double> instant_share;
  double demand_scale = 1.0;

  SolverConfig solver;
  PathOptions path_options;
  TrimWindow trim;
  DnlOptions dnl;

  bool dump_curves = false;
  bool dump_forecasts = false;
};

/// Throws ParseError with the offending line.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& file);
/// Applies DSUEDHI_<SECTION>_<KEY> variables that are set.
void apply_environment(Scenario& s);
/// Writes the scenario in the same format, every key included.
void write_scenario(std::ostream& out, const Scenario& s);

/// Network, paths and grid described by the scenario, with the class split
/// and demand scaling applied.
Problem build_problem(const Scenario& s);

}  // namespace dsuedhi::cli
