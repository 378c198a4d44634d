#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "psp/errors.hpp"
#include "psp/model.hpp"
#include "psp/rng.hpp"

using namespace psp;

TEST(Rng, UniformStaysInOpenInterval) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  auto a = make_stream(5, 1, 2);
  auto b = make_stream(5, 1, 2);
  auto c = make_stream(5, 1, 3);
  auto d = make_stream(5, 2, 2);
  const double ua = a.uniform();
  EXPECT_EQ(ua, b.uniform());
  EXPECT_NE(ua, c.uniform());
  EXPECT_NE(ua, d.uniform());
  EXPECT_NE(replicate_seed(5, 0), replicate_seed(5, 1));
}

TEST(TelegraphInvariant, InverseTransformValues) {
  // Direct evaluation of the two-branch inverse transform with b - a = 1.
  auto oracle = [](double u, double k) {
    double x = 0.0;
    if (std::log(2 * u) < 0) x += std::log(2 * u) / k;
    if (std::log(2 * (1 - u)) < 0) x -= std::log(2 * (1 - u)) / k;
    return x;
  };
  EXPECT_NEAR(telegraph_invariant_position(0.25, 1.0, 2.0), std::log(0.5), 1e-15);
  EXPECT_NEAR(telegraph_invariant_position(0.75, 1.0, 2.0), -std::log(0.5), 1e-15);
  EXPECT_EQ(telegraph_invariant_position(0.5, 1.0, 2.0), 0.0);
  for (double u : {0.01, 0.2, 0.49, 0.51, 0.9, 0.999}) {
    EXPECT_NEAR(telegraph_invariant_position(u, 0.5, 3.0), oracle(u, 2.5), 1e-14) << u;
  }
}

TEST(TelegraphInvariant, RejectsNonErgodicRates) {
  EXPECT_THROW(telegraph_invariant_position(0.3, 2.0, 2.0), UsageError);
  EXPECT_THROW(telegraph_invariant_position(0.3, 2.0, 1.0), UsageError);
  EXPECT_THROW(make_telegraph1d(2.0, 1.0), UsageError);
}

TEST(Telegraph1d, RatesFollowDirection) {
  const auto m = make_telegraph1d(1.0, 2.0);
  const int up = m->mode_index("+1"), down = m->mode_index("-1");
  EXPECT_EQ(m->rate({1.0, 0.0}, up), 2.0);    // moving away from 0
  EXPECT_EQ(m->rate({1.0, 0.0}, down), 1.0);  // moving towards 0
  EXPECT_EQ(m->rate({-1.0, 0.0}, down), 2.0);
  EXPECT_EQ(m->rate({0.0, 0.0}, up), 1.0);    // x*y = 0 counts as a
  EXPECT_EQ(m->flow(up).velocity({0.3, 0.0}).x, 1.0);
  EXPECT_EQ(m->flow(down).velocity({0.3, 0.0}).x, -1.0);
}

TEST(Telegraph2d, RateTable) {
  const double a = 1.0, b = 2.0;
  // At (1,1) in NE: E -> S has rate 1, N -> S has rate b, S -> N has rate a.
  EXPECT_EQ(telegraph2d_rate({1, 1}, east, south, a, b), 1.0);
  EXPECT_EQ(telegraph2d_rate({1, 1}, north, south, a, b), b);
  EXPECT_EQ(telegraph2d_rate({1, 1}, south, north, a, b), a);
  EXPECT_EQ(quadrant_of({1, 1}), Quadrant::ne);
  EXPECT_EQ(quadrant_of({1, -1}), Quadrant::se);
  EXPECT_EQ(quadrant_of({-1, -1}), Quadrant::sw);
  EXPECT_EQ(quadrant_of({-1, 1}), Quadrant::nw);
  for (Vec2 x : {Vec2{1, 1}, Vec2{-2, 0.5}, Vec2{0.3, -4}, Vec2{-1, -1}}) {
    for (int y = 0; y < 4; ++y) {
      EXPECT_EQ(telegraph2d_rate(x, y, y, a, b), 0.0);
      for (int t = 0; t < 4; ++t) EXPECT_GE(telegraph2d_rate(x, y, t, a, b), 0.0);
    }
  }
}

TEST(Pdsa, RatesAtKnownPoints) {
  const auto m = make_pdsa(7.0);
  const int up = m->mode_index("+1");
  EXPECT_EQ(pdsa_default_potential_derivative(0.0), 0.0);
  EXPECT_EQ(m->rate({0.0, 0.0}, up), 0.0);
  // U'(1) = 0.05 (4 + 3 - 8) < 0.
  EXPECT_NEAR(pdsa_default_potential_derivative(1.0), -0.05, 1e-15);
  EXPECT_EQ(m->rate({1.0, 0.0}, up), 0.0);
  EXPECT_NEAR(m->rate({2.0, 0.0}, up), 7.0 * 0.05 * (32 + 12 - 16), 1e-12);
}

TEST(Pdsa, GibbsNormalizerMatchesGaussKronrod) {
  for (double beta : {1.0, 3.0, 7.0}) {
    const double want = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::exp(-beta * pdsa_default_potential(x)); }, -10.0, 10.0, 15, 1e-14);
    EXPECT_NEAR(gibbs_normalizer(beta, pdsa_default_potential), want, 1e-9 * want) << beta;
  }
}

TEST(Pdsa, InvariantDensityIntegratesToOne) {
  const auto m = make_pdsa(7.0);
  ASSERT_TRUE(m->invariant);
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return m->invariant->density({x, 0.0}); }, -10.0, 10.0, 15, 1e-12);
  EXPECT_NEAR(mass, 1.0, 1e-9);
}

TEST(Flow, ConstantFlowIsExact) {
  const auto f = Flow::constant(2, {1.0, -2.0});
  const Vec2 x{0.5, 0.25};
  EXPECT_EQ(f(x, 0.0), x);
  const Vec2 y = f(x, 1.5);
  EXPECT_DOUBLE_EQ(y.x, 2.0);
  EXPECT_DOUBLE_EQ(y.y, -2.75);
}

TEST(Flow, GenericFlowSemigroup) {
  // Rotation field: phi is a rotation by t.
  const Flow f(VectorField{2, [](Vec2 x) { return Vec2{-x.y, x.x}; }});
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec2 x{2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
    const double s = rng.uniform(), t = rng.uniform();
    const Vec2 two = f(f(x, s), t);
    const Vec2 one = f(x, s + t);
    EXPECT_LT(norm(two - one), 1e-9);
    EXPECT_LT(norm(one - rotate(x, s + t)), 1e-9);
  }
  EXPECT_EQ(f({0.3, 0.4}, 0.0), (Vec2{0.3, 0.4}));
}

TEST(Models, RatesAreNonnegative) {
  Rng rng(3);
  const auto t1 = make_telegraph1d(1.0, 2.0);
  const auto pd = make_pdsa(7.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = 20 * rng.uniform() - 10;
    for (int y = 0; y < 2; ++y) {
      EXPECT_GE(t1->rate({x, 0}, y), 0.0);
      EXPECT_GE(pd->rate({x, 0}, y), 0.0);
    }
  }
}
