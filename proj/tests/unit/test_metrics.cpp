#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "dsuedhi/error.hpp"
#include "dsuedhi/metrics.hpp"

using namespace dsuedhi;

TEST(Trim, Window) {
  TrimWindow w;
  EXPECT_EQ(w.first(30), 6u);
  EXPECT_EQ(w.last(30), 24u);
  EXPECT_EQ(w.first(150), 30u);
  EXPECT_TRUE(w.contains(6, 30));
  EXPECT_FALSE(w.contains(24, 30));
  TrimWindow none{0.0};
  EXPECT_EQ(none.first(7), 0u);
  EXPECT_EQ(none.last(7), 7u);
  EXPECT_THROW(TrimWindow{0.5}.validate(), ValidationError);
  EXPECT_THROW(TrimWindow{-0.1}.validate(), ValidationError);
}

TEST(RelativeDifference, Scalars) {
  EXPECT_NEAR(relative_difference(6.0, 5.0), 0.2, 1e-15);
  EXPECT_NEAR(relative_difference(4.0, 5.0), -0.2, 1e-15);
  EXPECT_THROW(relative_difference(1.0, 0.0), std::invalid_argument);
}

TEST(RelativeDifference, Vectors) {
  const std::vector<double> a = {3.0, 4.0}, b = {0.0, 0.0}, c = {3.0, 0.0};
  EXPECT_DOUBLE_EQ(relative_difference(c, a), 4.0 / 5.0);
  EXPECT_THROW(relative_difference(a, b), std::invalid_argument);
  const std::vector<double> shorter = {1.0};
  EXPECT_THROW(relative_difference(a, shorter), std::invalid_argument);
}

TEST(PeakShare, LargestCellPerOd) {
  const auto net = testing_support::corridor();
  const auto paths = enumerate_all_paths(net, {});
  Matrix h(3, 2);
  h(0, 0) = 1;
  h(1, 1) = 3;
  h(2, 0) = 2;
  h(2, 1) = 2;
  EXPECT_DOUBLE_EQ(peak_share(h, paths), (3.0 + 2.0) / 8.0);
}

TEST(Metrics, TravelTimeAndDisutilityByHand) {
  const auto problem = testing_support::corridor_problem(0.5, 0.5, 1200, 120);
  ClassDepartures h{Matrix(3, 10), Matrix(3, 10)};
  h.instant(0, 5) = 0.5;
  h.forecast(2, 4) = 0.5;
  h.instant(1, 0) = 0.5;  // outside the window
  h.forecast(2, 9) = 0.5;
  const auto loading = problem.loader().load(h.total());
  const TrimWindow trim;
  const auto& ps = problem.paths();
  const double expected = 0.5 * ps[0].free_flow_time + 0.5 * ps[2].free_flow_time;
  EXPECT_NEAR(total_travel_time(h.total(), loading, trim), expected, 1e-6);
  const auto per_od = od_total_travel_time(h.total(), loading, ps, trim);
  EXPECT_NEAR(per_od[0], 0.5 * ps[0].free_flow_time, 1e-6);
  EXPECT_NEAR(per_od[1], 0.5 * ps[2].free_flow_time, 1e-6);

  const auto d = experienced_disutility(h, loading, problem, trim);
  const auto& grid = problem.grid();
  const double vi = systematic_disutility(ps[0].free_flow_time, grid.representative(5), 600, {});
  const double vf = systematic_disutility(ps[2].free_flow_time, grid.representative(4), 600, {});
  EXPECT_NEAR(d.instant_average(), vi, 1e-6);
  EXPECT_NEAR(d.forecast_average(), vf, 1e-6);
  EXPECT_NEAR(d.average(), 0.5 * (vi + vf), 1e-6);
  EXPECT_DOUBLE_EQ(d.instant_departures, 0.5);
}

TEST(Metrics, AccuracyFromStoredInformation) {
  const auto problem = testing_support::corridor_problem(3, 3, 1200, 120);
  const auto h = initial_departures(problem, InitPolicy::Uniform);
  auto ev = fixed_point_map(problem, h);
  // Overwrite the information with known offsets from the realized times.
  const auto& rtt = ev.loading.path_times();
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t t = 0; t < 10; ++t) {
      ev.instant(p, t) = rtt(p, t) + 3.0;
      ev.forecast_diagonal(p, t) = rtt(p, t) * 1.1;
    }
  }
  TrimWindow trim{0.0};
  const auto r = information_accuracy(ev, h, problem.paths(), trim);
  EXPECT_NEAR(r.instant_norm, std::sqrt(30.0 * 9.0), 1e-9);
  EXPECT_NEAR(r.forecast_relative(), 0.1, 1e-12);
  for (double v : r.od_forecast) EXPECT_NEAR(v, 0.1, 1e-12);
  EXPECT_EQ(r.records.size(), 60u);
  for (const auto& rec : r.records) {
    if (rec.cls == InfoClass::Forecast) EXPECT_NEAR(rec.rel_diff, 0.1, 1e-12);
    if (rec.cls == InfoClass::Instant) EXPECT_NEAR(rec.itt - rec.rtt, 3.0, 1e-9);
  }
  EXPECT_STREQ(to_string(InfoClass::Forecast), "forecast");
}
