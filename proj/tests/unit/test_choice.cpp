#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "dsuedhi/choice.hpp"
#include "dsuedhi/error.hpp"
#include "oracle/oracle.hpp"

using namespace dsuedhi;

namespace {

Matrix row_of(std::vector<double> v) {
  Matrix m(1, v.size());
  for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
  return m;
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace

TEST(Logit, SymmetricChoicesSplitEvenly) {
  const auto p = logit_probabilities(row_of({3.5, 3.5}), 1.0);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.5);
}

TEST(Logit, ShiftInvariance) {
  const auto a = logit_probabilities(row_of({0.3, 1.7, 2.2}), 0.8);
  const auto b = logit_probabilities(row_of({1000.3, 1001.7, 1002.2}), 0.8);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a(0, j), b(0, j), 1e-12);
}

TEST(Logit, LnTwoGap) {
  const auto p = logit_probabilities(row_of({0.0, std::log(2.0)}), 1.0);
  EXPECT_NEAR(p(0, 0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p(0, 1), 1.0 / 3.0, 1e-12);
}

TEST(Logit, TinyThetaIsUniform) {
  const auto p = logit_probabilities(from_rows({{0.0, 50.0}, {12.0, 3.0}}), 1e-9);
  for (double v : p.values()) EXPECT_NEAR(v, 0.25, 1e-6);
}

TEST(Logit, MatchesTextbookFormula) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(7);
    for (auto& x : v) x = u(rng);
    const auto p = logit_probabilities(row_of(v), 0.7);
    const auto ref = oracle::logit(v, 0.7);
    for (std::size_t j = 0; j < v.size(); ++j) EXPECT_NEAR(p(0, j), ref[j], 1e-12);
  }
  EXPECT_THROW(logit_probabilities(Matrix(), 1.0), std::invalid_argument);
}

TEST(Disutility, MatchesDirectFormula) {
  ChoiceParams params;
  for (double dep : {0.0, 600.0, 1500.0, 2400.0}) {
    for (double tt : {100.0, 300.0, 900.0}) {
      EXPECT_NEAR(systematic_disutility(tt, dep, 1800.0, params),
                  oracle::disutility(tt, dep, 1800.0, 0.8, 1.2, 60.0), 1e-12);
    }
  }
  // On-time arrival costs only the travel time.
  EXPECT_DOUBLE_EQ(systematic_disutility(120.0, 1680.0, 1800.0, params), 2.0);
}

TEST(Disutility, ParameterValidation) {
  ChoiceParams p;
  EXPECT_NO_THROW(validate(p));
  p.theta = 0;
  EXPECT_THROW(validate(p), ValidationError);
  p = {};
  p.mu_early = 1.0;
  EXPECT_THROW(validate(p), ValidationError);
  p = {};
  p.mu_late = 0.9;
  EXPECT_THROW(validate(p), ValidationError);
  p = {};
  p.time_unit = 0;
  EXPECT_THROW(validate(p), ValidationError);
}

TEST(Tentative, MatchesOracleAndConservesDemand) {
  const auto net = testing_support::corridor(6, 6);
  const auto paths = enumerate_all_paths(net, {});
  const TimeGrid grid(1200, 120);
  ChoiceParams params;
  params.theta = 0.6;
  const InstantInfo info{3, {130.0, 170.0, 240.0}};
  const std::vector<double> remaining = {7.5, 4.0};
  const auto tent = tentative_departures(info, remaining, net, paths, grid, params);
  ASSERT_EQ(tent.values.cols(), 7u);
  for (std::size_t w = 0; w < 2; ++w) {
    std::vector<double> v;
    for (auto p = paths.begin(w); p < paths.end(w); ++p) {
      for (std::size_t j = 0; j < 7; ++j) {
        v.push_back(oracle::disutility(info.times[p], grid.representative(3 + j),
                                       net.od(w).target_arrival, 0.8, 1.2,
                                       60.0));
      }
    }
    const auto ref = oracle::logit(v, 0.6);
    double sum = 0.0;
    std::size_t c = 0;
    for (auto p = paths.begin(w); p < paths.end(w); ++p) {
      for (std::size_t j = 0; j < 7; ++j, ++c) {
        EXPECT_NEAR(tent.values(p, j), remaining[w] * ref[c], 1e-9);
        sum += tent.values(p, j);
      }
    }
    EXPECT_NEAR(sum, remaining[w], 1e-12 * remaining[w]);
  }
}

TEST(Tentative, ForecastShapeIsChecked) {
  const auto net = testing_support::corridor();
  const auto paths = enumerate_all_paths(net, {});
  const TimeGrid grid(1200, 120);
  const ForecastInfo bad{2, Matrix(3, 4, 100.0)};
  const std::vector<double> remaining = {1, 1};
  EXPECT_THROW(tentative_departures(bad, remaining, net, paths, grid, {}), std::invalid_argument);
  const ForecastInfo good{2, Matrix(3, 8, 100.0)};
  const auto t = tentative_departures(good, remaining, net, paths, grid, {});
  EXPECT_NEAR(t.values.sum(), 2.0, 1e-12);
}

TEST(Tentative, ZeroDemandGivesZeros) {
  const auto net = testing_support::corridor();
  const auto paths = enumerate_all_paths(net, {});
  const TimeGrid grid(1200, 120);
  const std::vector<double> remaining = {0, 0};
  const auto t = tentative_departures(InstantInfo{0, {1, 2, 3}}, remaining, net, paths, grid, {});
  EXPECT_EQ(t.values.sum(), 0.0);
}

// Three paths of one OD over three intervals.
TEST(Realization, ThreeIntervalWorkedExample) {
  std::vector<Path> raw;
  std::vector<LinkRecord> links = {testing_support::link("1", "A", "B", 60, 1),
                                   testing_support::link("2", "A", "B", 70, 1),
                                   testing_support::link("3", "A", "B", 80, 1)};
  std::vector<DemandRecord> demand = {{"A", "B", 12, 12, 100, {}}};
  const auto net = validate_network({}, links, demand);
  const auto paths = enumerate_all_paths(net, {3, 10.0, 10.0});
  ASSERT_EQ(paths.size(), 3u);

  const TentativeDepartures g{0, from_rows({{1, 1, 1}, {1, 1, 1}, {2, 3, 1}})};
  const TentativeDepartures h{1, from_rows({{0, 0}, {3, 1}, {3, 1}})};
  const TentativeDepartures i{2, from_rows({{0}, {1}, {1}})};
  const TentativeDepartures j{0, from_rows({{2, 0, 0}, {2, 1, 1}, {2, 3, 1}})};
  const TentativeDepartures k{1, from_rows({{0, 0}, {1, 1}, {2, 2}})};
  const TentativeDepartures l{2, from_rows({{0}, {1}, {2}})};

  Matrix m(3, 3), n(3, 3);
  for (const auto* t : {&g, &h, &i}) {
    const auto col = realize_departures(*t);
    for (std::size_t p = 0; p < 3; ++p) m(p, t->provision) = col[p];
  }
  for (const auto* t : {&j, &k, &l}) {
    const auto col = realize_departures(*t);
    for (std::size_t p = 0; p < 3; ++p) n(p, t->provision) = col[p];
  }
  EXPECT_EQ(m, from_rows({{1, 0, 0}, {1, 3, 1}, {2, 3, 1}}));
  EXPECT_EQ(n, from_rows({{2, 0, 0}, {2, 1, 1}, {2, 2, 2}}));
  EXPECT_EQ(m + n, from_rows({{3, 0, 0}, {3, 4, 2}, {4, 5, 3}}));

  // Each tentative plan covers exactly the demand still at home.
  const std::vector<double> d = {12.0};
  EXPECT_DOUBLE_EQ(remaining_demand(m, d, paths, 1)[0], h.values.sum());
  EXPECT_DOUBLE_EQ(remaining_demand(m, d, paths, 2)[0], i.values.sum());
  EXPECT_DOUBLE_EQ(remaining_demand(n, d, paths, 1)[0], k.values.sum());
  EXPECT_DOUBLE_EQ(remaining_demand(n, d, paths, 2)[0], l.values.sum());
  EXPECT_DOUBLE_EQ(remaining_demand(m, d, paths, 3)[0], 0.0);
}

TEST(Realization, OverdrawIsAnError) {
  const auto net = testing_support::corridor();
  const auto paths = enumerate_all_paths(net, {});
  Matrix r(3, 4, 2.0);
  const std::vector<double> d = {5.0, 5.0};
  EXPECT_THROW(remaining_demand(r, d, paths, 3), ModelError);
  const std::vector<double> exact = {16.0, 8.0};
  const auto left = remaining_demand(r, exact, paths, 4);
  EXPECT_DOUBLE_EQ(left[0], 0.0);
  EXPECT_DOUBLE_EQ(left[1], 0.0);
}
