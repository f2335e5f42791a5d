#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsuedhi/equilibrium.hpp"
#include "dsuedhi_cli/scenario.hpp"

namespace dsuedhi::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNotConverged = 2, kModelError = 3 };

struct RunContext {
  std::filesystem::path out;
  ExecutionOptions exec;
  std::ostream* log = nullptr;  // progress messages; nullptr for silence
};

/// Summary figures of one solved scenario.
struct SolveSummary {
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  double instant_share = 0.0;
  double theta = 0.0;
  double avg_disutility_instant = 0.0;
  double avg_disutility_forecast = 0.0;
  double avg_disutility = 0.0;
  double total_travel_time = 0.0;
  double instant_norm = 0.0;
  double forecast_norm = 0.0;
  double instant_relative = 0.0;
  double forecast_relative = 0.0;
  double peak_share = 0.0;
};

SolveSummary summarize(const Problem& problem, const EquilibriumResult& result,
                       const TrimWindow& trim);

int run_validate(const Scenario& s, const RunContext& ctx);

/// Writes equilibrium.csv, trace.csv, accuracy.csv, metrics.json and
/// paths.csv (plus curves.csv and forecasts.csv when enabled) even when the
/// solver does not converge.
int run_solve(const Scenario& s, const RunContext& ctx);

struct SweepRow {
  double value = 0.0;
  std::string status;  // converged, not_converged or error
  SolveSummary summary;
};

/// theta sweeps hold the instantaneous share at 0.5, lambda sweeps hold theta
/// at 1. Writes sweep_<param>.csv.
int run_sweep(const Scenario& s, const std::string& param, const std::vector<double>& values,
              const RunContext& ctx);
std::vector<SweepRow> sweep(const Scenario& s, const std::string& param,
                            const std::vector<double>& values, const ExecutionOptions& exec);
void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep(std::istream& in);

struct CompareRow {
  std::string od;  // "all" for the whole population
  double disutility_dhi = 0.0;
  double disutility_dsue = 0.0;
  double disutility_rel_diff = 0.0;
  double ttt_dhi = 0.0;
  double ttt_dsue = 0.0;
  double ttt_rel_diff = 0.0;
};

/// Writes compare_dsue.csv.
int run_compare_dsue(const Scenario& s, const RunContext& ctx);
std::vector<CompareRow> compare_dsue(const Scenario& s, const ExecutionOptions& exec,
                                     bool* converged = nullptr);
void write_compare(std::ostream& out, const std::vector<CompareRow>& rows);
std::vector<CompareRow> read_compare(std::istream& in);

/// Writes multistart.csv with one row per random start.
int run_multistart(const Scenario& s, std::size_t n, std::uint64_t seed, const RunContext& ctx);
void write_multistart(std::ostream& out, const MultistartReport& report);
std::vector<MultistartRun> read_multistart(std::istream& in);

/// Entry point of the command-line tool.
int main_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsuedhi::cli
