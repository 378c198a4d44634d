#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "psp/errors.hpp"
#include "psp/rng.hpp"
#include "psp/surfaces.hpp"

using namespace psp;

TEST(Segment, NormalIsQuarterTurn) {
  const Segment s({0, 0}, {1, 0});
  EXPECT_EQ(s.normal(), (Vec2{0, 1}));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Segment r({rng.uniform(), rng.uniform()}, {rng.uniform() + 1, rng.uniform()});
    EXPECT_NEAR(norm(r.normal()), 1.0, 1e-15);
    EXPECT_NEAR(dot(r.normal(), r.b() - r.a()), 0.0, 1e-15);
  }
  EXPECT_THROW(Segment({1, 1}, {1, 1}), UsageError);
}

TEST(Square, VerticesAndDefiningFunction) {
  const auto sq = make_square(2.0);
  ASSERT_EQ(sq.segments.size(), 4u);
  for (const auto &s : sq.segments) {
    for (Vec2 v : {s.a(), s.b()}) {
      EXPECT_EQ(std::abs(v.x), 2.0);
      EXPECT_EQ(std::abs(v.y), 2.0);
    }
  }
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x{8 * rng.uniform() - 4, 8 * rng.uniform() - 4};
    const double m = std::max(std::abs(x.x), std::abs(x.y));
    if (m < 2.0) EXPECT_LT(sq.defining_fn(x), 0.0);
    if (m > 2.0) EXPECT_GT(sq.defining_fn(x), 0.0);
  }
}

TEST(SurfaceIntegral, Perimeters) {
  EXPECT_NEAR(surface_integral(make_square(2.0), [](Vec2) { return 1.0; }, 0.1), 16.0, 1e-12);
  EXPECT_NEAR(surface_integral(make_square(3.0), [](Vec2) { return 1.0; }, 0.1), 24.0, 1e-12);
  EXPECT_LT(std::abs(surface_integral(make_square(2.5), [](Vec2 x) { return x.x; }, 0.1)), 1e-12);
  const Segment s({0, 0}, {0.3, 0.4});
  EXPECT_NEAR(surface_integral(s, [](Vec2) { return 1.0; }, 0.07), 0.5, 0.07 * 0.07 * 0.5);
}

TEST(SurfaceIntegral, LinearAndAdditive) {
  const auto sq = make_square(1.5);
  auto f = [](Vec2 x) { return 2.0 * x.x - 0.5 * x.y + 1.0; };
  auto g = [](Vec2 x) { return x.x * 0.3 + 4.0; };
  const double lhs = surface_integral(sq, [&](Vec2 x) { return 2.0 * f(x) + 3.0 * g(x); }, 0.05);
  EXPECT_NEAR(lhs, 2.0 * surface_integral(sq, f, 0.05) + 3.0 * surface_integral(sq, g, 0.05), 1e-11);
  double by_edge = 0.0;
  for (const auto &s : sq.segments) by_edge += surface_integral(s, f, 0.05);
  EXPECT_NEAR(by_edge, surface_integral(sq, f, 0.05), 1e-12);
}

TEST(SurfaceIntegral, SecondOrderConvergence) {
  const Segment s({0, 0}, {3, 0});
  const double exact = 1.0 - std::cos(3.0);
  auto f = [](Vec2 x) { return std::sin(x.x); };
  const double e1 = std::abs(surface_integral(s, f, 0.2) - exact);
  const double e2 = std::abs(surface_integral(s, f, 0.1) - exact);
  EXPECT_GE(e1 / e2, 3.5);
}

TEST(SurfaceIntegral, NanIsReported) {
  try {
    surface_integral(Segment({0, 0}, {1, 0}), [](Vec2) { return std::numeric_limits<double>::quiet_NaN(); }, 0.5);
    FAIL() << "expected NumericError";
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("("), std::string::npos);
  }
}

TEST(NormalAt, Examples) {
  EXPECT_EQ(normal_at(Segment({0, 0}, {1, 0}), {0.5, 0}), (Vec2{0, 1}));
  const Surface sq = make_square(2.0);
  const Vec2 right = normal_at(sq, {2, 0});
  EXPECT_NEAR(right.x, 1.0, 1e-15);
  EXPECT_NEAR(right.y, 0.0, 1e-15);
  const Vec2 bottom = normal_at(sq, {0, -2});
  EXPECT_NEAR(bottom.x, 0.0, 1e-15);
  EXPECT_NEAR(bottom.y, -1.0, 1e-15);
  EXPECT_THROW(normal_at(sq, {2, 2}), UsageError);
  EXPECT_THROW(normal_at(sq, {0, 0}), UsageError);
}

TEST(NormalAt, PointsOutward) {
  const auto sq = make_square(2.0);
  const Surface s = sq;
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto &edge = sq.segments[rng.index(4)];
    const Vec2 x = edge.at(0.05 + 0.9 * rng.uniform());
    const Vec2 nu = normal_at(s, x);
    EXPECT_GT(sq.defining_fn(x + 1e-6 * nu), 0.0);
    EXPECT_LT(sq.defining_fn(x - 1e-6 * nu), 0.0);
  }
}

TEST(TubeIndicator, ClosedTube) {
  const Surface s = Segment({0, 0}, {1, 0});
  EXPECT_TRUE(tube_indicator(s, {0.5, 0.3}, 0.5));
  EXPECT_FALSE(tube_indicator(s, {0.5, 0.3}, 0.2));
  EXPECT_TRUE(tube_indicator(s, {-0.3, 0}, 0.3));
  EXPECT_TRUE(tube_indicator(Level{1.0}, {1.25, 0}, 0.25));
}

TEST(Quadrature, LevelHasOneNode) {
  const auto nodes = quadrature_nodes(Level{2.0}, 0.1);
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(nodes[0].weight, 1.0);
  EXPECT_EQ(nodes[0].point.x, 2.0);
}
