#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "psp/crossing.hpp"
#include "psp/errors.hpp"
#include "psp/kernels.hpp"

using namespace psp;

namespace {

GridTrajectory grid1(std::vector<double> xs) {
  GridTrajectory g;
  g.dim = 1;
  g.horizon = static_cast<double>(xs.size() - 1);
  for (double x : xs) g.samples.push_back({x, 0.0});
  return g;
}

GridTrajectory grid2(std::vector<Vec2> xs) {
  GridTrajectory g;
  g.dim = 2;
  g.horizon = static_cast<double>(xs.size() - 1);
  g.samples = std::move(xs);
  return g;
}

EventTrajectory single_arc(ModelPtr model, Vec2 x0, int mode, double horizon) {
  EventTrajectory t;
  t.model = std::move(model);
  t.horizon = horizon;
  t.events = {{0.0, x0, mode}};
  return t;
}

} // namespace

TEST(LevelGrid, Examples) {
  EXPECT_EQ(count_level_grid(grid1({0, 1}), Level{0.5}).total, 1);
  EXPECT_EQ(count_level_grid(grid1({0, 1, 0}), Level{0.5}).total, 2);
  EXPECT_EQ(count_level_grid(grid1({0, 1, 2}), Level{0.5}).total, 1);
  // A sample exactly on the level never contributes.
  EXPECT_EQ(count_level_grid(grid1({0, 0.5, 1}), Level{0.5}).total, 0);
  const auto c = count_level_grid(grid1({0, 1, 0, 1}), Level{0.5});
  EXPECT_EQ(c.total, c.upward + c.downward);
  EXPECT_EQ(c.upward, 2);
}

TEST(SegmentGrid, Examples) {
  const Segment s({0, 0}, {1, 0});
  EXPECT_EQ(count_segment_grid(grid2({{0.5, -1}, {0.5, 1}}), s).total, 1);
  EXPECT_EQ(count_segment_grid(grid2({{2, -1}, {2, 1}}), s).total, 0);
  EXPECT_EQ(count_segment_grid(grid2({{0.5, 1}, {0.5, 2}}), s).total, 0);
  EXPECT_TRUE(chord_crosses_segment({0.5, -1}, {0.5, 1}, {0, 0}, {1, 0}));
  EXPECT_FALSE(chord_crosses_segment({0.5, 0}, {0.5, 1}, {0, 0}, {1, 0}));  // touching is not proper
}

TEST(ExactCount, LinearArcThroughLevel) {
  const auto model = make_deterministic(1, {0, 0}, {1, 0});
  const auto c = count_exact(single_arc(model, {0, 0}, 0, 3.0), Level{2.0});
  EXPECT_EQ(c.total, 1);
  EXPECT_EQ(c.upward, 1);
  ASSERT_EQ(c.times.size(), 1u);
  EXPECT_NEAR(c.times[0], 2.0, 1e-12);
}

TEST(ExactCount, TelegraphArcMovingAway) {
  const auto model = make_telegraph1d(1.0, 2.0);
  EXPECT_EQ(count_exact(single_arc(model, {0, 0}, model->mode_index("-1"), 3.0), Level{2.0}).total, 0);
}

TEST(ExactCount, EastArcLeavesSquare) {
  const auto model = make_telegraph2d(1.0, 2.0);
  const auto c = count_exact(single_arc(model, {0, 0}, east, 5.0), make_square(2.0));
  EXPECT_EQ(c.total, 1);
  EXPECT_EQ(c.upward, 1);
  ASSERT_EQ(c.times.size(), 1u);
  EXPECT_NEAR(c.times[0], 2.0, 1e-12);
}

TEST(ExactCount, GenericFlowUsesRootFinding) {
  // Rotation flow, integrated numerically.
  auto m = std::make_shared<ProcessModel>();
  m->id = "rotation";
  m->dim = 2;
  m->mode_names = {"0"};
  m->flows = {Flow(VectorField{2, [](Vec2 x) { return Vec2{-x.y, x.x}; }})};
  m->rate = [](Vec2, int) { return 0.0; };
  m->transition = [](Vec2 x, int y, Rng &) { return Mark{x, y}; };
  m->initial = [](Rng &) { return Mark{{1, 0}, 0}; };
  const Surface seg = Segment({0.0, -5.0}, {0.0, 5.0});
  // Full turn crosses the vertical line x = 0 twice.
  EXPECT_EQ(count_exact(single_arc(m, {1, 0}, 0, 2 * std::numbers::pi), seg).total, 2);
}

TEST(ExactCount, SlidingAlongSurfaceIsNotACrossing) {
  const auto model = make_deterministic(2, {-1, 0}, {1, 0});
  EXPECT_EQ(count_exact(single_arc(model, {-1, 0}, 0, 3.0), Segment({0, 0}, {1, 0})).total, 0);
}

TEST(ExactCount, JumpOntoSurfaceIsRejected) {
  const auto model = make_telegraph1d(1.0, 2.0);
  EventTrajectory t;
  t.model = model;
  t.horizon = 3.0;
  t.events = {{0.0, {0, 0}, 1}, {2.0, {2, 0}, 0}};
  EXPECT_THROW(count_exact(t, Level{2.0}), DataError);
}

TEST(ExactCount, UpDownMatchesProjectionSign) {
  const auto model = make_telegraph2d(1.0, 2.0);
  const auto sq = make_square(2.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto t = simulate_event(model, 13, 0, i, 20.0);
    const auto c = count_exact(t, sq);
    EXPECT_EQ(c.total, c.upward + c.downward);
    long up = 0;
    for (double s : c.times) {
      const Vec2 x = t.state_at(s);
      const Vec2 v = model->flow(t.mode_at(s)).velocity(x);
      if (dot(v, normal_at(Surface(sq), x)) > 0) ++up;
    }
    EXPECT_EQ(up, c.upward);
  }
}

TEST(Dominance, OneDimensionalGridNeverExceedsExact) {
  const auto model = make_telegraph1d(1.0, 2.0);
  const auto paths = kernels::simulate_batch_parallel(model, 50.0, 31, 0, 200);
  for (double level : {0.0, 1.0, 2.0}) {
    const auto exact = kernels::count_exact_parallel(paths, Level{level});
    for (double h : {0.01, 0.1, 1.0, 2.0}) {
      const auto data = kernels::sample_batch_parallel(paths, grid_points_for_step(50.0, h));
      for (std::size_t i = 0; i < paths.size(); ++i) {
        ASSERT_LE(count_level_grid(data[i], Level{level}).total, exact[i].total);
      }
    }
  }
}

TEST(Dominance, LongSegmentGridNeverExceedsExact) {
  // A segment longer than any excursion behaves like a line: each sign
  // change of the chord implies a continuous crossing.
  const auto model = make_telegraph2d(1.0, 2.0);
  const auto paths = kernels::simulate_batch_parallel(model, 20.0, 32, 0, 200);
  const Surface seg = Segment({0.5, -100}, {0.5, 100});
  const auto exact = kernels::count_exact_parallel(paths, seg);
  for (double h : {0.1, 1.0, 2.0}) {
    const auto data = kernels::sample_batch_parallel(paths, grid_points_for_step(20.0, h));
    for (std::size_t i = 0; i < paths.size(); ++i) ASSERT_LE(count_grid(data[i], seg).total, exact[i].total);
  }
}

TEST(Dominance, SquareCornerCanBeOvercounted) {
  // The chord cuts the corner (2, 2) twice while the path goes around it.
  const auto sq = make_square(2.0);
  const auto model = make_telegraph2d(1.0, 2.0);
  EventTrajectory t;
  t.model = model;
  t.horizon = 2.0;
  t.events = {{0.0, {1.5, 2.1}, east}, {1.0, {2.5, 2.1}, south}};
  const auto g = sample_grid(t, 2);
  EXPECT_EQ(count_grid(g, sq).total, 2);
  EXPECT_EQ(count_exact(t, sq).total, 0);
}

TEST(Refinement, GridCountConvergesToExact) {
  const auto model = make_telegraph1d(1.0, 2.0);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto t = simulate_event(model, 77, 0, i, 20.0);
    const long exact = count_exact(t, Level{0.5}).total;
    long previous = -1;
    std::size_t n = 11;
    for (int k = 0; k < 14; ++k, n = 2 * n - 1) {
      const long g = count_level_grid(sample_grid(t, n), Level{0.5}).total;
      EXPECT_LE(g, exact);
      previous = g;
    }
    EXPECT_EQ(previous, exact);
  }
}

TEST(Kac, Examples) {
  EXPECT_NEAR(kac_numeric([](double t) { return std::sin(t); }, [](double t) { return std::cos(t); },
                          2 * std::numbers::pi, 0.5, 1e-3, 1e-6),
              2.0, 1e-2);
  EXPECT_NEAR(kac_numeric([](double t) { return t; }, [](double) { return 1.0; }, 1.0, 0.5, 1e-3, 1e-6), 1.0, 1e-6);
  EXPECT_NEAR(kac_numeric([](double t) { return t * t; }, [](double t) { return 2 * t; }, 1.0, 0.25, 1e-3, 1e-6), 1.0,
              1e-2);
}

TEST(LocalTime, DeterministicLine) {
  const auto model = make_deterministic(1, {0, 0}, {1, 0});
  const auto g = sample_grid(simulate_event(model, 1, 0, 0, 1.0), 1000001);
  EXPECT_NEAR(local_time(g, Level{0.5}, 1e-2).value, 1.0, 1e-3);
  EXPECT_EQ(local_time(g, Level{2.0}, 1e-2).value, 0.0);
}

TEST(LocalTime, ApproachesCrossingCountForUnitSpeed) {
  const auto model = make_telegraph1d(1.0, 2.0);
  const auto t = simulate_event(model, 55, 0, 3, 30.0);
  const long k = count_exact(t, Level{1.0}).total;
  const auto g = sample_grid(t, grid_points_for_step(30.0, 1e-4));
  // Turning points close to the level inflate wide windows, so only small
  // windows are compared.
  ASSERT_GT(k, 0);
  for (double delta : {1e-3, 5e-4}) {
    EXPECT_NEAR(local_time(g, Level{1.0}, delta).value, static_cast<double>(k), 0.02 * static_cast<double>(k));
  }
}

TEST(LocalTime, AverageRelativeErrorShrinks) {
  const auto model = make_telegraph1d(1.0, 2.0);
  const auto paths = kernels::simulate_batch_parallel(model, 20.0, 77, 0, 100);
  const auto grids = kernels::sample_batch_parallel(paths, grid_points_for_step(20.0, 1e-3));
  double previous = 1e300;
  for (double delta : {0.2, 0.1, 0.05, 0.02}) {
    double err = 0.0, total = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const double k = static_cast<double>(count_exact(paths[i], Level{1.0}).total);
      err += std::abs(local_time(grids[i], Level{1.0}, delta).value - k);
      total += k;
    }
    const double rel = err / total;
    EXPECT_LE(rel, previous * 1.05) << delta;
    previous = rel;
  }
  EXPECT_LT(previous, 0.05);
}

TEST(LocalTime, TwoDimensionalInequality) {
  // c_S(H) <= sup |(r, nu)| l_S(H) with unit speeds.
  const auto model = make_telegraph2d(1.0, 2.0);
  const auto paths = kernels::simulate_batch_parallel(model, 20.0, 66, 0, 100);
  const Surface sq = make_square(2.0);
  double lt = 0.0, count = 0.0;
  for (const auto &p : paths) {
    count += static_cast<double>(count_exact(p, sq).total);
    lt += local_time(sample_grid(p, grid_points_for_step(20.0, 1e-3)), sq, 0.02).value;
  }
  EXPECT_LE(count, lt * 1.05);
}

TEST(Kernels, SerialAndParallelExactCountsAgree) {
  const auto model = make_telegraph2d(1.0, 2.0);
  const auto paths = kernels::simulate_batch_parallel(model, 20.0, 3, 0, 100);
  const auto s = kernels::count_exact_serial(paths, make_square(3.0));
  const auto p = kernels::count_exact_parallel(paths, make_square(3.0));
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].total, p[i].total);
    EXPECT_EQ(s[i].times, p[i].times);
  }
}
