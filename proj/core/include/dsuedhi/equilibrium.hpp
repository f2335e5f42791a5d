#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dsuedhi/choice.hpp"
#include "dsuedhi/dnl.hpp"
#include "dsuedhi/info_types.hpp"
#include "dsuedhi/matrix.hpp"
#include "dsuedhi/network.hpp"
#include "dsuedhi/paths.hpp"

namespace dsuedhi {

/// Everything a solve needs: network, paths, time grid, behaviour and a
/// loader built once for the path set.
class Problem {
 public:
  Problem(Network net, PathSet paths, TimeGrid grid, ChoiceParams params, DnlOptions dnl = {});

  const Network& network() const noexcept { return net_; }
  const PathSet& paths() const noexcept { return paths_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const ChoiceParams& params() const noexcept { return params_; }
  const Loader& loader() const noexcept { return *loader_; }

  std::vector<double> instant_demand() const;
  std::vector<double> forecast_demand() const;
  std::vector<double> total_demand() const;

 private:
  Network net_;
  PathSet paths_;
  TimeGrid grid_;
  ChoiceParams params_;
  std::shared_ptr<const Loader> loader_;
};

/// Departures of the two information classes, each paths x T.
struct ClassDepartures {
  Matrix instant;
  Matrix forecast;

  Matrix total() const { return instant + forecast; }
};

enum class InitPolicy { FreeFlow, Uniform };

struct SolverConfig {
  double tolerance = 1e-4;  // on the squared relative residual
  double step_up = 1.1;     // added to beta when the residual does not shrink
  double step_down = 0.2;   // added to beta when it shrinks
  std::size_t max_iterations = 100;
  InitPolicy init = InitPolicy::FreeFlow;
};

/// Throws ValidationError unless tolerance > 0, step_up > 1,
/// 0 < step_down < 1 and max_iterations >= 1.
void validate(const SolverConfig& config);

/// One application of the map together with the information it generated.
struct MapEvaluation {
  ClassDepartures output;
  Matrix instant;            // paths x T, column t holds the information given at t
  Matrix forecast_diagonal;  // paths x T, forecast given at t for departure at t
  std::vector<ForecastInfo> forecasts;
  LoadingResult loading;     // loading of the input departures
  std::size_t dnl_calls = 0;
};

struct ExecutionOptions {
  /// Worker threads for the forecast loadings; results do not depend on it.
  std::size_t threads = 1;
};

MapEvaluation fixed_point_map(const Problem& problem, const ClassDepartures& h,
                              const ExecutionOptions& exec = {});

/// Single-class map: logit over every (path, interval) with the realized
/// travel times of the loading of h.
Matrix dsue_map(const Problem& problem, const Matrix& h, LoadingResult* loading = nullptr);

/// ||h - y||^2 / ||h||^2; 0 when both vanish, +inf when only h does.
double residual(const Matrix& h, const Matrix& y);

struct IterationRecord {
  std::size_t k = 0;
  double residual = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
};

struct EquilibriumResult {
  ClassDepartures departures;  // for the single-class model, all demand is in `instant`
  std::vector<IterationRecord> trace;
  std::size_t iterations = 0;
  bool converged = false;
  /// Map evaluation at the returned point (DHI model only).
  std::optional<MapEvaluation> evaluation;
  /// Loading of the returned total departures.
  std::optional<LoadingResult> loading;

  Matrix total() const { return departures.total(); }
};

struct SolveOptions {
  ExecutionOptions exec;
  /// Starting point; overrides SolverConfig::init.
  std::optional<ClassDepartures> initial;
  /// Called with every iterate before its map evaluation.
  std::function<void(std::size_t k, const ClassDepartures& iterate)> observer;
};

ClassDepartures initial_departures(const Problem& problem, InitPolicy policy);

/// Random positive departures rescaled so that every OD matches its class demands.
ClassDepartures random_departures(const Problem& problem, std::uint64_t seed);

EquilibriumResult solve_sram(const Problem& problem, const SolverConfig& config,
                             const SolveOptions& options = {});

/// Classical single-class equilibrium h = M(t(h), d) solved with the same
/// step-size rule.
EquilibriumResult solve_dsue(const Problem& problem, const SolverConfig& config,
                             const SolveOptions& options = {});

struct MultistartRun {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  std::size_t iterations = 0;
  double distance = 0.0;  // squared relative distance to the baseline; NaN if not converged
};

struct MultistartReport {
  EquilibriumResult baseline;
  std::vector<MultistartRun> runs;
  std::size_t failures = 0;
  double max_distance = 0.0;
};

/// Solves from the configured start and from `starts` random starts seeded
/// seed, seed + 1, ...
MultistartReport multistart(const Problem& problem, const SolverConfig& config,
                            std::size_t starts, std::uint64_t seed,
                            const ExecutionOptions& exec = {});

}  // namespace dsuedhi
