#include "psp/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "psp/errors.hpp"

namespace psp {

Flow::Flow(VectorField field, double step) : field_(std::move(field)), step_(step) {
  if (!(step_ > 0.0)) throw UsageError("flow integration step must be positive");
}

Flow Flow::constant(int dim, Vec2 velocity) {
  Flow f(VectorField{dim, [velocity](Vec2) { return velocity; }});
  f.constant_ = velocity;
  return f;
}

Vec2 Flow::operator()(Vec2 x, double t) const {
  if (t == 0.0) return x;
  if (constant_) return x + t * *constant_;
  const auto steps = std::max<long>(1, static_cast<long>(std::ceil(std::abs(t) / step_)));
  const double dt = t / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) {
    const Vec2 k1 = field_.eval(x);
    const Vec2 k2 = field_.eval(x + 0.5 * dt * k1);
    const Vec2 k3 = field_.eval(x + 0.5 * dt * k2);
    const Vec2 k4 = field_.eval(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

int ProcessModel::mode_index(const std::string &name) const {
  const auto it = std::find(mode_names.begin(), mode_names.end(), name);
  if (it == mode_names.end()) throw DataError("unknown mode label '" + name + "' for process " + id);
  return static_cast<int>(it - mode_names.begin());
}

double telegraph_invariant_position(double u, double a, double b) {
  if (!(b > a && a > 0.0)) throw UsageError("telegraph requires b > a > 0 (non-ergodic parameterization)");
  if (!(u > 0.0 && u < 1.0)) throw UsageError("uniform draw must lie in (0, 1)");
  const double lo = std::log(2.0 * u);
  const double hi = std::log(2.0 * (1.0 - u));
  double x = 0.0;
  if (lo < 0.0) x += lo / (b - a);
  if (hi < 0.0) x -= hi / (b - a);
  return x;
}

Mark telegraph_invariant_sample(Rng &rng, double a, double b) {
  const double x = telegraph_invariant_position(rng.uniform(), a, b);
  const int mode = rng.uniform() < 0.5 ? 0 : 1;
  return {{x, 0.0}, mode};
}

namespace {

Mark flip_mode(Vec2 x, int mode, Rng &) { return {x, 1 - mode}; }

double mode_sign(int mode) { return mode == 1 ? 1.0 : -1.0; }

} // namespace

ModelPtr make_telegraph1d(double a, double b, InitialLaw init, Mark fixed_start) {
  if (!(b > a && a > 0.0)) throw UsageError("telegraph requires b > a > 0 (non-ergodic parameterization)");
  auto m = std::make_shared<ProcessModel>();
  m->id = "telegraph";
  m->dim = 1;
  m->mode_names = {"-1", "+1"};
  m->flows = {Flow::constant(1, {-1.0, 0.0}), Flow::constant(1, {1.0, 0.0})};
  m->rate = [a, b](Vec2 x, int mode) { return x.x * mode_sign(mode) > 0.0 ? b : a; };
  m->rate_piece = [a, b](Vec2 x, int mode) -> RatePiece {
    const double xy = x.x * mode_sign(mode);
    if (xy < 0.0) return {a, std::abs(x.x)};
    return {b, std::numeric_limits<double>::infinity()};
  };
  m->transition = flip_mode;
  InvariantDensity inv;
  inv.density = [a, b](Vec2 x) { return 0.5 * (b - a) * std::exp(-(b - a) * std::abs(x.x)); };
  inv.sample = [a, b](Rng &rng) { return telegraph_invariant_sample(rng, a, b); };
  inv.mode_weights = {0.5, 0.5};
  m->invariant = inv;
  if (init == InitialLaw::stationary) {
    m->initial = inv.sample;
  } else {
    m->initial = [fixed_start](Rng &) { return fixed_start; };
  }
  return m;
}

double pdsa_default_potential(double x) { return 0.05 * (x * x * x * x + x * x * x - 4.0 * x * x); }

double pdsa_default_potential_derivative(double x) { return 0.05 * (4.0 * x * x * x + 3.0 * x * x - 8.0 * x); }

namespace {

double simpson(const std::function<double(double)> &f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double gibbs_normalizer(double beta, const std::function<double(double)> &potential, double lo, double hi,
                        double tol) {
  const auto f = [&](double x) { return std::exp(-beta * potential(x)); };
  // Split the range so the recursion never starts from a coarse, misleading
  // three-point estimate.
  constexpr int pieces = 64;
  const double w = (hi - lo) / pieces;
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double a = lo + i * w;
    const double b = a + w;
    const double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    total += simpson(f, a, b, fa, fm, fb, w / 6.0 * (fa + 4.0 * fm + fb), tol / pieces, 40);
  }
  return total;
}

ModelPtr make_pdsa(double beta, std::function<double(double)> potential,
                   std::function<double(double)> potential_derivative, InitialLaw init, Mark fixed_start) {
  if (!(beta > 0.0)) throw UsageError("pdsa requires beta > 0");
  auto m = std::make_shared<ProcessModel>();
  m->id = "pdsa";
  m->dim = 1;
  m->mode_names = {"-1", "+1"};
  m->flows = {Flow::constant(1, {-1.0, 0.0}), Flow::constant(1, {1.0, 0.0})};
  m->rate = [beta, potential_derivative](Vec2 x, int mode) {
    return beta * std::max(0.0, mode_sign(mode) * potential_derivative(x.x));
  };
  m->transition = flip_mode;

  const double z = gibbs_normalizer(beta, potential);
  // Tabulated CDF of the Gibbs density for stationary starts.
  constexpr int cells = 40000;
  constexpr double lo = -10.0, hi = 10.0;
  const double dx = (hi - lo) / cells;
  auto cdf = std::make_shared<std::vector<double>>(cells + 1, 0.0);
  double prev = std::exp(-beta * potential(lo));
  for (int i = 1; i <= cells; ++i) {
    const double cur = std::exp(-beta * potential(lo + i * dx));
    (*cdf)[i] = (*cdf)[i - 1] + 0.5 * dx * (prev + cur);
    prev = cur;
  }
  const double total = cdf->back();
  for (auto &c : *cdf) c /= total;

  InvariantDensity inv;
  inv.density = [beta, potential, z](Vec2 x) { return std::exp(-beta * potential(x.x)) / z; };
  inv.sample = [cdf, dx](Rng &rng) {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf->begin(), cdf->end(), u);
    const auto i = std::clamp<std::ptrdiff_t>(it - cdf->begin(), 1, static_cast<std::ptrdiff_t>(cdf->size()) - 1);
    const double c0 = (*cdf)[i - 1], c1 = (*cdf)[i];
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    const double x = lo + (static_cast<double>(i - 1) + frac) * dx;
    const int mode = rng.uniform() < 0.5 ? 0 : 1;
    return Mark{{x, 0.0}, mode};
  };
  inv.mode_weights = {0.5, 0.5};
  m->invariant = inv;
  if (init == InitialLaw::stationary) {
    m->initial = inv.sample;
  } else {
    m->initial = [fixed_start](Rng &) { return fixed_start; };
  }
  return m;
}

Quadrant quadrant_of(Vec2 x) {
  if (x.x >= 0.0) return x.y >= 0.0 ? Quadrant::ne : Quadrant::se;
  return x.y <= 0.0 ? Quadrant::sw : Quadrant::nw;
}

namespace {

constexpr std::array<Vec2, 4> cardinal_velocity = {Vec2{0.0, 1.0}, Vec2{0.0, -1.0}, Vec2{1.0, 0.0},
                                                   Vec2{-1.0, 0.0}};

double rate_in_quadrant(Quadrant q, int from, int to, double a, double b) {
  const auto is = [from](int c) { return from == c ? 1.0 : 0.0; };
  const auto in = [q](Quadrant r) { return q == r ? 1.0 : 0.0; };
  switch (to) {
  case north:
    return (is(west) + b * is(south)) * in(Quadrant::sw) + a * is(south) * in(Quadrant::ne);
  case south:
    return (is(east) + b * is(north)) * in(Quadrant::ne) + a * is(north) * in(Quadrant::sw);
  case east:
    return (is(north) + b * is(west)) * in(Quadrant::nw) + a * is(west) * in(Quadrant::se);
  case west:
    return (is(south) + b * is(east)) * in(Quadrant::se) + a * is(east) * in(Quadrant::nw);
  default:
    return 0.0;
  }
}

double total_rate_in_quadrant(Quadrant q, int from, double a, double b) {
  double total = 0.0;
  for (int to = 0; to < 4; ++to) {
    if (to != from) total += rate_in_quadrant(q, from, to, a, b);
  }
  return total;
}

} // namespace

double telegraph2d_rate(Vec2 x, int from, int to, double a, double b) {
  if (from == to) return 0.0;
  return rate_in_quadrant(quadrant_of(x), from, to, a, b);
}

ModelPtr make_telegraph2d(double a, double b) {
  if (!(b > a && a > 0.0)) throw UsageError("telegraph2d requires b > a > 0");
  auto m = std::make_shared<ProcessModel>();
  m->id = "telegraph2d";
  m->dim = 2;
  m->mode_names = {"N", "S", "E", "W"};
  for (const auto v : cardinal_velocity) m->flows.push_back(Flow::constant(2, v));
  m->rate = [a, b](Vec2 x, int mode) { return total_rate_in_quadrant(quadrant_of(x), mode, a, b); };
  m->rate_piece = [a, b](Vec2 x, int mode) -> RatePiece {
    const Vec2 v = cardinal_velocity[static_cast<std::size_t>(mode)];
    const bool horizontal = v.y == 0.0;
    const double c = horizontal ? x.x : x.y;
    const double s = horizontal ? v.x : v.y;
    if (c * s < 0.0) return {total_rate_in_quadrant(quadrant_of(x), mode, a, b), std::abs(c)};
    // Moving away from (or starting on) the axis: the right-limit quadrant
    // holds for the rest of the arc.
    Vec2 probe = x;
    if (c == 0.0) (horizontal ? probe.x : probe.y) = s;
    return {total_rate_in_quadrant(quadrant_of(probe), mode, a, b), std::numeric_limits<double>::infinity()};
  };
  m->transition = [a, b](Vec2 x, int mode, Rng &rng) -> Mark {
    std::array<double, 4> w{};
    double total = 0.0;
    for (int to = 0; to < 4; ++to) {
      w[static_cast<std::size_t>(to)] = telegraph2d_rate(x, mode, to, a, b);
      total += w[static_cast<std::size_t>(to)];
    }
    if (!(total > 0.0)) return {x, mode};
    double u = rng.uniform() * total;
    for (int to = 0; to < 4; ++to) {
      u -= w[static_cast<std::size_t>(to)];
      if (u < 0.0 && w[static_cast<std::size_t>(to)] > 0.0) return {x, to};
    }
    for (int to = 3; to >= 0; --to) {
      if (w[static_cast<std::size_t>(to)] > 0.0) return {x, to};
    }
    return {x, mode};
  };
  m->initial = [](Rng &rng) { return Mark{{0.0, 0.0}, static_cast<int>(rng.index(4))}; };
  return m;
}

ModelPtr make_deterministic(int dim, Vec2 start, Vec2 velocity) {
  auto m = std::make_shared<ProcessModel>();
  m->id = "deterministic";
  m->dim = dim;
  m->mode_names = {"0"};
  m->flows = {Flow::constant(dim, velocity)};
  m->rate = [](Vec2, int) { return 0.0; };
  m->rate_piece = [](Vec2, int) { return RatePiece{}; };
  m->transition = [](Vec2 x, int mode, Rng &) { return Mark{x, mode}; };
  m->initial = [start](Rng &) { return Mark{start, 0}; };
  return m;
}

} // namespace psp
