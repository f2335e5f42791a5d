#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "common.hpp"
#include "dsuedhi/error.hpp"
#include "dsuedhi/io.hpp"
#include "dsuedhi_cli/runner.hpp"
#include "dsuedhi_cli/scenario.hpp"

namespace fs = std::filesystem;
using namespace dsuedhi;
using namespace dsuedhi::cli;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dsuedhi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    for (const auto& v : env_) ::unsetenv(v.c_str());
    fs::remove_all(dir_);
  }

  fs::path scenario(const std::string& extra, const std::string& demand_file = "") {
    const auto file = dir_ / "scenario.ini";
    std::ofstream out(file);
    out << "[scenario]\nid = t\nnetwork = " << testing_support::data_path("corridor/links.csv")
        << "\ndemand = "
        << (demand_file.empty() ? testing_support::data_path("corridor/demand.csv") : demand_file)
        << "\noutput = " << (dir_ / "out").string() << "\n"
        << "[time]\nhorizon_s = 3600\ninterval_s = 120\n"
        << extra;
    return file;
  }

  int run(std::vector<std::string> args) {
    std::vector<const char*> argv = {"dsuedhi"};
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str({});
    err_.str({});
    return main_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  void setenv(const std::string& k, const std::string& v) {
    ::setenv(k.c_str(), v.c_str(), 1);
    env_.push_back(k);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
  std::vector<std::string> env_;
};

}  // namespace

TEST_F(CliTest, ValidateReportsCounts) {
  EXPECT_EQ(run({"validate", "--scenario", scenario("").string()}), 0);
  EXPECT_NE(out_.str().find("paths 3"), std::string::npos);
}

TEST_F(CliTest, EmptyLinkListIsAModelError) {
  const auto links = dir_ / "links.csv";
  std::ofstream(links) << "id,tail,head,length_m,free_speed_mps,backward_wave_speed_mps,"
                          "capacity_veh_per_s,jam_density_veh_per_m\n";
  auto file = scenario("");
  std::ofstream(file, std::ios::app) << "[scenario]\nnetwork = " << links.string() << "\n";
  EXPECT_EQ(run({"validate", "--scenario", file.string()}), 3);
  EXPECT_NE(err_.str().find("OD pair with no path"), std::string::npos);
}

TEST_F(CliTest, MalformedInputsAreUsageErrors) {
  EXPECT_EQ(run({"validate", "--scenario", scenario("[solver]\nbogus = 1\n").string()}), 1);
  EXPECT_NE(err_.str().find("line "), std::string::npos);

  const auto demand = dir_ / "demand.csv";
  std::ofstream(demand) << "origin,destination,demand_instant,demand_forecast,target_arrival_s\n"
                           "A,C,1,1\n";
  EXPECT_EQ(run({"validate", "--scenario", scenario("", demand.string()).string()}), 1);
  EXPECT_NE(err_.str().find("line 2: expected 5 fields"), std::string::npos);

  EXPECT_EQ(run({"solve"}), 1);
  EXPECT_EQ(run({"validate", "--scenario", (dir_ / "missing.ini").string()}), 1);
}

TEST_F(CliTest, SolveWritesReadableArtifacts) {
  const auto file = scenario("[output]\ndump_curves = true\ndump_forecasts = true\n");
  ASSERT_EQ(run({"solve", "--scenario", file.string()}), 0) << err_.str();
  const auto out = dir_ / "out";
  const auto s = load_scenario(file);
  const auto problem = build_problem(s);
  const auto& net = problem.network();

  std::ifstream pin(out / "paths.csv");
  const auto paths = io::read_paths(pin, net);
  EXPECT_EQ(paths.size(), 3u);
  std::ifstream ein(out / "equilibrium.csv");
  const auto h = io::read_equilibrium(ein, net, paths, problem.grid().intervals());
  EXPECT_NEAR(h.total().sum(), net.total_demand(), 1e-9 * net.total_demand());
  std::ifstream tin(out / "trace.csv");
  const auto trace = io::read_trace(tin);
  ASSERT_FALSE(trace.empty());
  EXPECT_LE(trace.back().residual, s.solver.tolerance);
  std::ifstream ain(out / "accuracy.csv");
  EXPECT_FALSE(io::read_accuracy(ain, net).empty());
  std::ifstream cin(out / "curves.csv");
  EXPECT_FALSE(io::read_curves(cin).empty());
  std::ifstream fin(out / "forecasts.csv");
  EXPECT_FALSE(io::read_forecasts(fin).empty());

  const auto metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
  ASSERT_TRUE(metrics.contains("t"));
  EXPECT_TRUE(metrics["t"]["converged"].get<bool>());
  EXPECT_EQ(metrics["t"]["iterations"].get<std::size_t>(), trace.size());
}

TEST_F(CliTest, IterationCapExitsTwoWithShortTrace) {
  const auto file = scenario("[solver]\nmax_iterations = 2\ntolerance = 1e-12\n");
  EXPECT_EQ(run({"solve", "--scenario", file.string()}), 2);
  std::ifstream tin(dir_ / "out" / "trace.csv");
  EXPECT_EQ(io::read_trace(tin).size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "equilibrium.csv"));
}

TEST_F(CliTest, ArtifactsAreDeterministic) {
  const auto file = scenario("");
  const auto names = {"paths.csv", "equilibrium.csv", "trace.csv", "accuracy.csv",
                      "metrics.json"};
  ASSERT_EQ(run({"solve", "--scenario", file.string(), "--out", (dir_ / "a").string()}), 0);
  ASSERT_EQ(run({"solve", "--scenario", file.string(), "--out", (dir_ / "b").string(),
                 "--threads", "8"}),
            0);
  for (const auto* n : names) EXPECT_EQ(slurp(dir_ / "a" / n), slurp(dir_ / "b" / n)) << n;
}

TEST_F(CliTest, EnvironmentOverridesScenario) {
  const auto file = scenario("[choice]\ntheta = 1\n");
  setenv("DSUEDHI_CHOICE_THETA", "0.25");
  setenv("DSUEDHI_SOLVER_MAX_ITERATIONS", "7");
  const auto s = load_scenario(file);
  EXPECT_DOUBLE_EQ(s.choice.theta, 0.25);
  EXPECT_EQ(s.solver.max_iterations, 7u);
  setenv("DSUEDHI_CHOICE_THETA", "abc");
  EXPECT_THROW(load_scenario(file), ParseError);
}

TEST_F(CliTest, PrintConfigRoundTrips) {
  const auto file = scenario("[classes]\ninstant_share = 0.3\n[dnl]\nmax_source_queue = inf\n");
  ASSERT_EQ(run({"print-config", "--scenario", file.string()}), 0);
  const auto printed = out_.str();
  std::istringstream in(printed);
  const auto s = parse_scenario(in, dir_);
  std::ostringstream again;
  write_scenario(again, s);
  EXPECT_EQ(again.str(), printed);
  ASSERT_TRUE(s.instant_share.has_value());
  EXPECT_DOUBLE_EQ(*s.instant_share, 0.3);
}

TEST_F(CliTest, SweepOfRepeatedValueGivesIdenticalRows) {
  const auto file = scenario("");
  ASSERT_EQ(run({"sweep", "--scenario", file.string(), "--param", "theta", "--values", "0.7,0.7"}),
            0);
  std::ifstream in(dir_ / "out" / "sweep_theta.csv");
  const auto rows = read_sweep(in);
  ASSERT_EQ(rows.size(), 2u);
  std::ostringstream a, b;
  write_sweep(a, {rows[0]});
  write_sweep(b, {rows[1]});
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(rows[0].status, "converged");
  const auto direct = sweep(load_scenario(file), "theta", {0.7, 2.0}, {});
  EXPECT_DOUBLE_EQ(direct[0].summary.instant_share, 0.5);
  EXPECT_DOUBLE_EQ(direct[0].summary.theta, 0.7);
  EXPECT_EQ(run({"sweep", "--scenario", file.string(), "--param", "mu", "--values", "1"}), 1);
}

TEST_F(CliTest, CompareUncongestedIsZero) {
  const auto file = scenario("[classes]\ndemand_scale = 0.01\n[solver]\ntolerance = 1e-12\n");
  ASSERT_EQ(run({"compare-dsue", "--scenario", file.string()}), 0) << err_.str();
  std::ifstream in(dir_ / "out" / "compare_dsue.csv");
  const auto rows = read_compare(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.back().od, "all");
  for (const auto& r : rows) {
    EXPECT_NEAR(r.disutility_rel_diff, 0.0, 1e-6) << r.od;
    EXPECT_NEAR(r.ttt_rel_diff, 0.0, 1e-6) << r.od;
  }
}

TEST_F(CliTest, CompareZeroDemandIsEmpty) {
  const auto file = scenario("[classes]\ndemand_scale = 0\n");
  ASSERT_EQ(run({"compare-dsue", "--scenario", file.string()}), 0) << err_.str();
  std::ifstream in(dir_ / "out" / "compare_dsue.csv");
  EXPECT_TRUE(read_compare(in).empty());
}

TEST_F(CliTest, MultistartTable) {
  const auto file = scenario("[classes]\ndemand_scale = 0.2\n");
  ASSERT_EQ(run({"multistart", "--scenario", file.string(), "--n", "3", "--seed", "5"}), 0)
      << err_.str();
  std::ifstream in(dir_ / "out" / "multistart.csv");
  const auto runs = read_multistart(in);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[0].seed, 5u);
  for (const auto& r : runs) EXPECT_TRUE(r.converged);
  EXPECT_EQ(run({"multistart", "--scenario", file.string(), "--n", "1"}), 1);
}
