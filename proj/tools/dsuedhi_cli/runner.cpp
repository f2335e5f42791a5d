#include "dsuedhi_cli/runner.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "dsuedhi/error.hpp"
#include "dsuedhi/io.hpp"
#include "dsuedhi/metrics.hpp"

namespace dsuedhi::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream create(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

void prepare(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::ostream& log(const RunContext& ctx) {
  static std::ostream null(nullptr);
  return ctx.log ? *ctx.log : null;
}

/// JSON keeps NaN out of the file; a missing figure becomes null.
nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json to_json(const SolveSummary& s) {
  nlohmann::ordered_json j;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["residual"] = number(s.residual);
  j["instant_share"] = number(s.instant_share);
  j["theta"] = number(s.theta);
  j["avg_disutility_instant"] = number(s.avg_disutility_instant);
  j["avg_disutility_forecast"] = number(s.avg_disutility_forecast);
  j["avg_disutility"] = number(s.avg_disutility);
  j["total_travel_time_s"] = number(s.total_travel_time);
  j["instant_norm_s"] = number(s.instant_norm);
  j["forecast_norm_s"] = number(s.forecast_norm);
  j["instant_relative"] = number(s.instant_relative);
  j["forecast_relative"] = number(s.forecast_relative);
  j["peak_share"] = number(s.peak_share);
  return j;
}

double field(const std::string& v, std::size_t line, const char* name) {
  if (v == "nan") return kNaN;
  return io::parse_double(v, line, name);
}

std::string cell(double v) { return std::isnan(v) ? std::string("nan") : io::format_double(v); }

}  // namespace

SolveSummary summarize(const Problem& problem, const EquilibriumResult& result,
                       const TrimWindow& trim) {
  SolveSummary s;
  s.converged = result.converged;
  s.iterations = result.iterations;
  s.residual = result.trace.empty() ? kNaN : result.trace.back().residual;
  s.instant_share = problem.network().instant_share();
  s.theta = problem.params().theta;
  const Matrix h = result.total();
  const auto& loading = result.evaluation ? result.evaluation->loading : *result.loading;
  const auto dis = experienced_disutility(result.departures, loading, problem, trim);
  s.avg_disutility_instant = dis.instant_average();
  s.avg_disutility_forecast = dis.forecast_average();
  s.avg_disutility = dis.average();
  s.total_travel_time = total_travel_time(h, loading, trim);
  s.peak_share = peak_share(h, problem.paths());
  if (result.evaluation) {
    const auto acc = information_accuracy(*result.evaluation, result.departures, problem.paths(),
                                          trim);
    s.instant_norm = acc.instant_norm;
    s.forecast_norm = acc.forecast_norm;
    s.instant_relative = acc.instant_relative();
    s.forecast_relative = acc.forecast_relative();
  } else {
    s.instant_norm = s.forecast_norm = s.instant_relative = s.forecast_relative = kNaN;
  }
  return s;
}

int run_validate(const Scenario& s, const RunContext& ctx) {
  const auto problem = build_problem(s);
  const auto& net = problem.network();
  log(ctx) << "nodes " << net.nodes().size() << ", links " << net.links().size() << ", od pairs "
           << net.ods().size() << ", paths " << problem.paths().size() << ", intervals "
           << problem.grid().intervals() << ", substeps " << problem.loader().substeps() << '\n';
  return kOk;
}

int run_solve(const Scenario& s, const RunContext& ctx) {
  const auto problem = build_problem(s);
  SolveOptions opts;
  opts.exec = ctx.exec;
  const auto result = solve_sram(problem, s.solver, opts);
  const auto& net = problem.network();
  const auto& ev = *result.evaluation;

  prepare(ctx.out);
  {
    auto out = create(ctx.out / "paths.csv");
    io::write_paths(out, net, problem.paths());
  }
  {
    auto out = create(ctx.out / "equilibrium.csv");
    io::write_equilibrium(out, net, problem.paths(), result.departures);
  }
  {
    auto out = create(ctx.out / "trace.csv");
    io::write_trace(out, result.trace);
  }
  {
    auto out = create(ctx.out / "accuracy.csv");
    io::write_accuracy(out, net,
                       information_accuracy(ev, result.departures, problem.paths(), s.trim));
  }
  {
    nlohmann::ordered_json j;
    j[s.id] = to_json(summarize(problem, result, s.trim));
    auto out = create(ctx.out / "metrics.json");
    out << j.dump(2) << '\n';
  }
  if (s.dump_curves) {
    auto out = create(ctx.out / "curves.csv");
    io::write_curves(out, net, ev.loading);
  }
  if (s.dump_forecasts) {
    auto out = create(ctx.out / "forecasts.csv");
    io::write_forecasts(out, ev.forecasts);
  }
  log(ctx) << s.id << ": " << (result.converged ? "converged" : "not converged") << " after "
           << result.iterations << " iterations, residual "
           << io::format_double(result.trace.back().residual) << '\n';
  return result.converged ? kOk : kNotConverged;
}

std::vector<SweepRow> sweep(const Scenario& s, const std::string& param,
                            const std::vector<double>& values, const ExecutionOptions& exec) {
  if (param != "theta" && param != "lambda") {
    throw ValidationError("sweep parameter must be theta or lambda");
  }
  if (values.size() < 2) throw ValidationError("a sweep needs at least two values");
  std::vector<SweepRow> rows;
  for (const double v : values) {
    Scenario point = s;
    if (param == "theta") {
      point.choice.theta = v;
      point.instant_share = 0.5;
    } else {
      point.instant_share = v;
      point.choice.theta = 1.0;
    }
    SweepRow row;
    row.value = v;
    try {
      const auto problem = build_problem(point);
      SolveOptions opts;
      opts.exec = exec;
      const auto result = solve_sram(problem, point.solver, opts);
      row.summary = summarize(problem, result, point.trim);
      row.status = result.converged ? "converged" : "not_converged";
    } catch (const Error&) {
      row.status = "error";
      auto& m = row.summary;
      m.residual = m.instant_share = m.theta = kNaN;
      m.avg_disutility_instant = m.avg_disutility_forecast = m.avg_disutility = kNaN;
      m.total_travel_time = m.instant_norm = m.forecast_norm = kNaN;
      m.instant_relative = m.forecast_relative = m.peak_share = kNaN;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "value,status,iterations,avg_disutility_instant,avg_disutility_forecast,avg_disutility,"
         "total_travel_time_s,instant_norm_s,forecast_norm_s,instant_relative,"
         "forecast_relative,peak_share\n";
  for (const auto& r : rows) {
    const auto& m = r.summary;
    out << cell(r.value) << ',' << r.status << ',' << m.iterations << ','
        << cell(m.avg_disutility_instant) << ',' << cell(m.avg_disutility_forecast) << ','
        << cell(m.avg_disutility) << ',' << cell(m.total_travel_time) << ','
        << cell(m.instant_norm) << ',' << cell(m.forecast_norm) << ','
        << cell(m.instant_relative) << ',' << cell(m.forecast_relative) << ','
        << cell(m.peak_share) << '\n';
  }
}

std::vector<SweepRow> read_sweep(std::istream& in) {
  const auto t = io::read_csv(in);
  if (t.header.size() != 12 || t.header[0] != "value") throw ParseError(0, "not a sweep table");
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const auto ln = t.lines[i];
    SweepRow r;
    r.value = field(c[0], ln, "value");
    r.status = c[1];
    if (r.status != "converged" && r.status != "not_converged" && r.status != "error") {
      throw ParseError(ln, "unknown status '" + r.status + "'");
    }
    auto& m = r.summary;
    m.converged = r.status == "converged";
    m.iterations = io::parse_index(c[2], ln, "iterations");
    m.avg_disutility_instant = field(c[3], ln, "avg_disutility_instant");
    m.avg_disutility_forecast = field(c[4], ln, "avg_disutility_forecast");
    m.avg_disutility = field(c[5], ln, "avg_disutility");
    m.total_travel_time = field(c[6], ln, "total_travel_time_s");
    m.instant_norm = field(c[7], ln, "instant_norm_s");
    m.forecast_norm = field(c[8], ln, "forecast_norm_s");
    m.instant_relative = field(c[9], ln, "instant_relative");
    m.forecast_relative = field(c[10], ln, "forecast_relative");
    m.peak_share = field(c[11], ln, "peak_share");
    rows.push_back(r);
  }
  return rows;
}

int run_sweep(const Scenario& s, const std::string& param, const std::vector<double>& values,
              const RunContext& ctx) {
  const auto rows = sweep(s, param, values, ctx.exec);
  prepare(ctx.out);
  auto out = create(ctx.out / ("sweep_" + param + ".csv"));
  write_sweep(out, rows);
  int code = kOk;
  for (const auto& r : rows) {
    log(ctx) << param << " = " << io::format_double(r.value) << ": " << r.status << '\n';
    if (r.status == "error") {
      code = kModelError;
    } else if (r.status == "not_converged" && code == kOk) {
      code = kNotConverged;
    }
  }
  return code;
}

std::vector<CompareRow> compare_dsue(const Scenario& s, const ExecutionOptions& exec,
                                     bool* converged) {
  const auto problem = build_problem(s);
  SolveOptions opts;
  opts.exec = exec;
  const auto dhi = solve_sram(problem, s.solver, opts);
  const auto dsue = solve_dsue(problem, s.solver, opts);
  if (converged) *converged = dhi.converged && dsue.converged;

  const auto& paths = problem.paths();
  const auto dis_dhi = experienced_disutility(dhi.departures, dhi.evaluation->loading, problem,
                                              s.trim);
  const auto dis_dsue = experienced_disutility(dsue.departures, *dsue.loading, problem, s.trim);
  const auto ttt_dhi = od_total_travel_time(dhi.total(), dhi.evaluation->loading, paths, s.trim);
  const auto ttt_dsue = od_total_travel_time(dsue.total(), *dsue.loading, paths, s.trim);

  auto rel = [](double a, double b) {
    if (b == 0.0) return a == 0.0 ? 0.0 : kNaN;
    return relative_difference(a, b);
  };
  std::vector<CompareRow> rows;
  double dh = 0.0, ds = 0.0, th = 0.0, ts = 0.0;
  for (std::size_t w = 0; w < paths.od_count(); ++w) {
    if (!(problem.network().od(w).demand() > 0.0)) continue;
    CompareRow r;
    r.od = problem.network().od_label(w);
    r.disutility_dhi = dis_dhi.ods[w].total();
    r.disutility_dsue = dis_dsue.ods[w].total();
    r.disutility_rel_diff = rel(r.disutility_dhi, r.disutility_dsue);
    r.ttt_dhi = ttt_dhi[w];
    r.ttt_dsue = ttt_dsue[w];
    r.ttt_rel_diff = rel(r.ttt_dhi, r.ttt_dsue);
    dh += r.disutility_dhi;
    ds += r.disutility_dsue;
    th += r.ttt_dhi;
    ts += r.ttt_dsue;
    rows.push_back(r);
  }
  if (!rows.empty()) rows.push_back({"all", dh, ds, rel(dh, ds), th, ts, rel(th, ts)});
  return rows;
}

void write_compare(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "od,disutility_dhi,disutility_dsue,disutility_rel_diff,ttt_dhi_s,ttt_dsue_s,"
         "ttt_rel_diff\n";
  for (const auto& r : rows) {
    out << r.od << ',' << cell(r.disutility_dhi) << ',' << cell(r.disutility_dsue) << ','
        << cell(r.disutility_rel_diff) << ',' << cell(r.ttt_dhi) << ',' << cell(r.ttt_dsue)
        << ',' << cell(r.ttt_rel_diff) << '\n';
  }
}

std::vector<CompareRow> read_compare(std::istream& in) {
  const auto t = io::read_csv(in);
  if (t.header.size() != 7 || t.header[0] != "od") throw ParseError(0, "not a comparison table");
  std::vector<CompareRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const auto ln = t.lines[i];
    rows.push_back({c[0], field(c[1], ln, "disutility_dhi"), field(c[2], ln, "disutility_dsue"),
                    field(c[3], ln, "disutility_rel_diff"), field(c[4], ln, "ttt_dhi_s"),
                    field(c[5], ln, "ttt_dsue_s"), field(c[6], ln, "ttt_rel_diff")});
  }
  return rows;
}

int run_compare_dsue(const Scenario& s, const RunContext& ctx) {
  bool converged = false;
  const auto rows = compare_dsue(s, ctx.exec, &converged);
  prepare(ctx.out);
  auto out = create(ctx.out / "compare_dsue.csv");
  write_compare(out, rows);
  log(ctx) << s.id << ": " << rows.size() << " comparison rows"
           << (converged ? "" : ", a solve did not converge") << '\n';
  return converged ? kOk : kNotConverged;
}

void write_multistart(std::ostream& out, const MultistartReport& report) {
  out << "run,seed,converged,iterations,distance\n";
  for (const auto& r : report.runs) {
    out << r.index << ',' << r.seed << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ','
        << cell(r.distance) << '\n';
  }
}

std::vector<MultistartRun> read_multistart(std::istream& in) {
  const auto t = io::read_csv(in);
  if (t.header.size() != 5 || t.header[0] != "run") throw ParseError(0, "not a multistart table");
  std::vector<MultistartRun> runs;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const auto ln = t.lines[i];
    MultistartRun r;
    r.index = io::parse_index(c[0], ln, "run");
    r.seed = io::parse_index(c[1], ln, "seed");
    const auto conv = io::parse_index(c[2], ln, "converged");
    if (conv > 1) throw ParseError(ln, "converged must be 0 or 1");
    r.converged = conv == 1;
    r.iterations = io::parse_index(c[3], ln, "iterations");
    r.distance = field(c[4], ln, "distance");
    runs.push_back(r);
  }
  return runs;
}

int run_multistart(const Scenario& s, std::size_t n, std::uint64_t seed, const RunContext& ctx) {
  const auto problem = build_problem(s);
  const auto report = multistart(problem, s.solver, n, seed, ctx.exec);
  prepare(ctx.out);
  auto out = create(ctx.out / "multistart.csv");
  write_multistart(out, report);
  log(ctx) << s.id << ": " << report.runs.size() - report.failures << " of " << report.runs.size()
           << " starts converged, max distance " << io::format_double(report.max_distance)
           << '\n';
  return report.failures == 0 && report.baseline.converged ? kOk : kNotConverged;
}

int main_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic stochastic user equilibrium with heterogeneous travel time information"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir;
  std::size_t threads = 1;
  std::string param;
  std::vector<double> values;
  std::size_t n = 20;
  std::uint64_t seed = 1;

  auto add_scenario = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--scenario", scenario_file, "Scenario file")
                  ->envname("DSUEDHI_SCENARIO");
    if (required) o->required();
  };
  auto add_run = [&](CLI::App* sub) {
    add_scenario(sub, true);
    sub->add_option("--out", out_dir, "Output directory (default: the scenario's)")
        ->envname("DSUEDHI_OUT");
    sub->add_option("--threads", threads, "Worker threads for forecast loadings")
        ->envname("DSUEDHI_THREADS")
        ->check(CLI::PositiveNumber);
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario and its inputs");
  add_scenario(validate_cmd, true);
  auto* solve_cmd = app.add_subcommand("solve", "Solve a scenario and write its artifacts");
  add_run(solve_cmd);
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a range of theta or lambda");
  add_run(sweep_cmd);
  sweep_cmd->add_option("--param", param, "theta or lambda")
      ->required()
      ->check(CLI::IsMember({"theta", "lambda"}));
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  auto* compare_cmd = app.add_subcommand("compare-dsue", "Compare with the single-class model");
  add_run(compare_cmd);
  auto* multi_cmd = app.add_subcommand("multistart", "Solve from seeded random starts");
  add_run(multi_cmd);
  multi_cmd->add_option("--n", n, "Number of random starts")->check(CLI::Range(2u, 1000000u));
  multi_cmd->add_option("--seed", seed, "Seed of the first start")->envname("DSUEDHI_SEED");
  auto* print_cmd = app.add_subcommand("print-config", "Print the effective configuration");
  add_scenario(print_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    Scenario s;
    if (!scenario_file.empty()) {
      s = load_scenario(scenario_file);
    } else {
      apply_environment(s);
    }
    RunContext ctx;
    ctx.out = out_dir.empty() ? s.output : fs::path(out_dir);
    ctx.exec.threads = threads;
    ctx.log = &out;

    if (*print_cmd) {
      write_scenario(out, s);
      return kOk;
    }
    if (*validate_cmd) return run_validate(s, ctx);
    if (*solve_cmd) return run_solve(s, ctx);
    if (*sweep_cmd) return run_sweep(s, param, values, ctx);
    if (*compare_cmd) return run_compare_dsue(s, ctx);
    if (*multi_cmd) return run_multistart(s, n, seed, ctx);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kModelError;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kModelError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace dsuedhi::cli
