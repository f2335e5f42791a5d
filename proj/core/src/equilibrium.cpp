#include "dsuedhi/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "dsuedhi/error.hpp"
#include "dsuedhi/info.hpp"

namespace dsuedhi {

Problem::Problem(Network net, PathSet paths, TimeGrid grid, ChoiceParams params, DnlOptions dnl)
    : net_(std::move(net)), paths_(std::move(paths)), grid_(grid), params_(params) {
  validate(params_);
  if (paths_.od_count() != net_.ods().size()) {
    throw ValidationError("path set does not match the network's OD pairs");
  }
  loader_ = std::make_shared<const Loader>(net_, paths_, grid_, dnl);
}

std::vector<double> Problem::instant_demand() const {
  std::vector<double> d;
  for (const auto& od : net_.ods()) d.push_back(od.demand_instant);
  return d;
}

std::vector<double> Problem::forecast_demand() const {
  std::vector<double> d;
  for (const auto& od : net_.ods()) d.push_back(od.demand_forecast);
  return d;
}

std::vector<double> Problem::total_demand() const {
  std::vector<double> d;
  for (const auto& od : net_.ods()) d.push_back(od.demand());
  return d;
}

void validate(const SolverConfig& config) {
  if (!(config.tolerance > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (!(config.step_up > 1.0) || !std::isfinite(config.step_up)) {
    throw ValidationError("step growth on residual increase must exceed 1");
  }
  if (!(config.step_down > 0.0 && config.step_down < 1.0)) {
    throw ValidationError("step growth on residual decrease must lie in (0, 1)");
  }
  if (config.max_iterations < 1) throw ValidationError("max iterations must be at least 1");
}

namespace {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Exceptions are
/// rethrown for the lowest failing index so the outcome is scheduling-free.
template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body body) {
  const auto workers = std::min(std::max<std::size_t>(threads, 1), n);
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t first) {
    for (std::size_t i = first; i < n; i += workers) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void set_column(Matrix& m, std::size_t t, const std::vector<double>& col) {
  for (std::size_t p = 0; p < m.rows(); ++p) m(p, t) = col[p];
}

}  // namespace

MapEvaluation fixed_point_map(const Problem& problem, const ClassDepartures& h,
                              const ExecutionOptions& exec) {
  const auto& net = problem.network();
  const auto& paths = problem.paths();
  const auto& grid = problem.grid();
  const auto& params = problem.params();
  const auto P = paths.size();
  const auto T = grid.intervals();
  if (h.instant.rows() != P || h.instant.cols() != T || h.forecast.rows() != P ||
      h.forecast.cols() != T) {
    throw std::invalid_argument("class departures must be paths x intervals");
  }

  const Matrix total = h.total();
  MapEvaluation ev{{Matrix(P, T), Matrix(P, T)}, Matrix(P, T), Matrix(P, T), {}, problem.loader().load(total), 1};
  std::vector<InstantInfo> instant(T);
  for (std::size_t t = 0; t < T; ++t) {
    instant[t] = instant_info(ev.loading, t);
    set_column(ev.instant, t, instant[t].times);
  }

  const auto demand = problem.total_demand();
  ev.forecasts.resize(T);
  parallel_for(T, exec.threads, [&](std::size_t t) {
    const auto remaining = remaining_demand(total, demand, paths, t);
    const auto predicted = forecast_departures(instant[t], remaining, net, paths, grid, params);
    ev.forecasts[t] = forecast_info(problem.loader(), splice(total, predicted), t);
  });
  ev.dnl_calls += T;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t p = 0; p < P; ++p) ev.forecast_diagonal(p, t) = ev.forecasts[t].times(p, 0);
  }

  const auto demand_i = problem.instant_demand();
  const auto demand_f = problem.forecast_demand();
  for (std::size_t t = 0; t < T; ++t) {
    const auto rem_i = remaining_demand(ev.output.instant, demand_i, paths, t);
    const auto rem_f = remaining_demand(ev.output.forecast, demand_f, paths, t);
    set_column(ev.output.instant, t,
               realize_departures(tentative_departures(instant[t], rem_i, net, paths, grid, params)));
    set_column(ev.output.forecast, t,
               realize_departures(
                   tentative_departures(ev.forecasts[t], rem_f, net, paths, grid, params)));
  }
  return ev;
}

Matrix dsue_map(const Problem& problem, const Matrix& h, LoadingResult* loading) {
  auto result = problem.loader().load(h);
  ForecastInfo realized{0, result.path_times()};
  auto y = tentative_departures(realized, problem.total_demand(), problem.network(),
                                problem.paths(), problem.grid(), problem.params())
               .values;
  if (loading) *loading = std::move(result);
  return y;
}

double residual(const Matrix& h, const Matrix& y) {
  const double denom = squared_norm(h);
  const double num = squared_distance(h, y);
  if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / denom;
}

ClassDepartures initial_departures(const Problem& problem, InitPolicy policy) {
  const auto P = problem.paths().size();
  const auto T = problem.grid().intervals();
  if (policy == InitPolicy::Uniform) {
    ClassDepartures out{Matrix(P, T), Matrix(P, T)};
    const auto di = problem.instant_demand();
    const auto df = problem.forecast_demand();
    for (std::size_t w = 0; w < di.size(); ++w) {
      const auto cells = static_cast<double>(problem.paths().count(w) * T);
      for (auto p = problem.paths().begin(w); p < problem.paths().end(w); ++p) {
        for (std::size_t t = 0; t < T; ++t) {
          out.instant(p, t) = di[w] / cells;
          out.forecast(p, t) = df[w] / cells;
        }
      }
    }
    return out;
  }
  InstantInfo free_flow{0, {}};
  for (const auto& p : problem.paths().paths()) free_flow.times.push_back(p.free_flow_time);
  auto assign = [&](const std::vector<double>& d) {
    return tentative_departures(free_flow, d, problem.network(), problem.paths(), problem.grid(),
                                problem.params())
        .values;
  };
  return {assign(problem.instant_demand()), assign(problem.forecast_demand())};
}

ClassDepartures random_departures(const Problem& problem, std::uint64_t seed) {
  const auto& paths = problem.paths();
  const auto P = paths.size();
  const auto T = problem.grid().intervals();
  std::mt19937_64 rng(seed);
  // Uniform in (0, 1] from the top 53 bits, identical on every platform.
  auto draw = [&rng] { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; };
  ClassDepartures out{Matrix(P, T), Matrix(P, T)};
  auto fill = [&](Matrix& m, const std::vector<double>& d) {
    for (auto& v : m.values()) v = draw();
    for (std::size_t w = 0; w < d.size(); ++w) {
      double s = 0.0;
      for (auto p = paths.begin(w); p < paths.end(w); ++p) {
        for (std::size_t t = 0; t < T; ++t) s += m(p, t);
      }
      for (auto p = paths.begin(w); p < paths.end(w); ++p) {
        for (std::size_t t = 0; t < T; ++t) m(p, t) *= d[w] / s;
      }
    }
  };
  fill(out.instant, problem.instant_demand());
  fill(out.forecast, problem.forecast_demand());
  return out;
}

namespace {

void blend(Matrix& h, const Matrix& y, double alpha) {
  auto hv = h.values();
  const auto yv = y.values();
  for (std::size_t i = 0; i < hv.size(); ++i) hv[i] += alpha * (yv[i] - hv[i]);
}

/// Self-regulated averaging around `evaluate`, which maps an iterate to its
/// image and keeps whatever it needs about the last evaluation.
template <class Evaluate>
EquilibriumResult sram(const SolverConfig& config, ClassDepartures h, const SolveOptions& options,
                       Evaluate evaluate) {
  validate(config);
  EquilibriumResult result;
  double beta = 1.0;
  double previous = 0.0;
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    if (options.observer) options.observer(k, h);
    const ClassDepartures y = evaluate(h);
    const Matrix ht = h.total();
    const Matrix yt = y.total();
    const double gap = std::sqrt(squared_distance(ht, yt));
    if (k > 1) beta += gap >= previous ? config.step_up : config.step_down;
    previous = gap;
    const double alpha = 1.0 / beta;
    const double r = residual(ht, yt);
    result.trace.push_back({k, r, beta, alpha});
    result.iterations = k;
    if (r <= config.tolerance) {
      result.converged = true;
      break;
    }
    if (k == config.max_iterations) break;
    blend(h.instant, y.instant, alpha);
    blend(h.forecast, y.forecast, alpha);
  }
  result.departures = std::move(h);
  return result;
}

}  // namespace

EquilibriumResult solve_sram(const Problem& problem, const SolverConfig& config,
                             const SolveOptions& options) {
  auto start = options.initial ? *options.initial : initial_departures(problem, config.init);
  std::optional<MapEvaluation> last;
  auto result = sram(config, std::move(start), options, [&](const ClassDepartures& h) {
    last = fixed_point_map(problem, h, options.exec);
    return last->output;
  });
  result.loading = last->loading;
  result.evaluation = std::move(last);
  return result;
}

EquilibriumResult solve_dsue(const Problem& problem, const SolverConfig& config,
                             const SolveOptions& options) {
  auto start = options.initial ? *options.initial : initial_departures(problem, config.init);
  const auto P = problem.paths().size();
  const auto T = problem.grid().intervals();
  ClassDepartures single{start.total(), Matrix(P, T)};
  std::optional<LoadingResult> last;
  auto result = sram(config, std::move(single), options, [&](const ClassDepartures& h) {
    LoadingResult loading;
    ClassDepartures y{dsue_map(problem, h.instant, &loading), Matrix(P, T)};
    last = std::move(loading);
    return y;
  });
  result.loading = std::move(last);
  return result;
}

MultistartReport multistart(const Problem& problem, const SolverConfig& config,
                            std::size_t starts, std::uint64_t seed,
                            const ExecutionOptions& exec) {
  if (starts < 2) throw ValidationError("multistart needs at least two starts");
  MultistartReport report;
  SolveOptions options;
  options.exec = exec;
  report.baseline = solve_sram(problem, config, options);
  const Matrix base = report.baseline.total();
  const double base_norm = squared_norm(base);
  for (std::size_t i = 0; i < starts; ++i) {
    MultistartRun run;
    run.index = i;
    run.seed = seed + i;
    options.initial = random_departures(problem, run.seed);
    const auto solved = solve_sram(problem, config, options);
    run.converged = solved.converged;
    run.iterations = solved.iterations;
    if (solved.converged) {
      const double d = squared_distance(solved.total(), base);
      run.distance = base_norm > 0.0 ? d / base_norm : d;
      report.max_distance = std::max(report.max_distance, run.distance);
    } else {
      run.distance = std::numeric_limits<double>::quiet_NaN();
      ++report.failures;
    }
    report.runs.push_back(run);
  }
  return report;
}

}  // namespace dsuedhi
