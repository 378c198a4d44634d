#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psp/geometry.hpp"
#include "psp/rng.hpp"

namespace psp {

struct VectorField {
  int dim = 1;
  std::function<Vec2(Vec2)> eval;
};

/// Deterministic flow of one mode. Constant-velocity flows are handled in
/// closed form everywhere (simulation, exact counting); other flows are
/// integrated with classical RK4 at a fixed step.
class Flow {
public:
  Flow() = default;
  explicit Flow(VectorField field, double step = 1e-3);

  static Flow constant(int dim, Vec2 velocity);

  Vec2 operator()(Vec2 x, double t) const;
  Vec2 velocity(Vec2 x) const { return field_.eval(x); }
  int dim() const { return field_.dim; }
  double step() const { return step_; }
  const std::optional<Vec2> &constant_velocity() const { return constant_; }

private:
  VectorField field_;
  std::optional<Vec2> constant_;
  double step_ = 1e-3;
};

/// Post-jump mark.
struct Mark {
  Vec2 x;
  int mode = 0;
};

/// Total jump rate along an arc when it is piecewise constant in time:
/// `rate` holds from the queried point for `valid_for` time units.
struct RatePiece {
  double rate = 0.0;
  double valid_for = std::numeric_limits<double>::infinity();
};

/// Invariant density of the position component, when one is known in closed
/// form (or up to a normalizing constant computed by quadrature).
struct InvariantDensity {
  std::function<double(Vec2)> density;
  /// Stationary start sampler (position and mode).
  std::function<Mark(Rng &)> sample;
  /// Stationary mode probabilities, independent of position.
  std::vector<double> mode_weights;
};

/// Piecewise deterministic Markov process in the Euclidean-mode setting.
struct ProcessModel {
  std::string id;
  int dim = 1;
  std::vector<std::string> mode_names;
  std::vector<Flow> flows;
  /// Total jump rate out of (x, mode).
  std::function<double(Vec2, int)> rate;
  /// Mark kernel applied at a jump from (x, mode).
  std::function<Mark(Vec2, int, Rng &)> transition;
  /// Initial mark.
  std::function<Mark(Rng &)> initial;
  /// Optional exact rate schedule along the current arc; enables inversion
  /// sampling instead of thinning.
  std::function<RatePiece(Vec2, int)> rate_piece;
  std::optional<InvariantDensity> invariant;

  std::size_t mode_count() const { return flows.size(); }
  const Flow &flow(int mode) const { return flows.at(static_cast<std::size_t>(mode)); }
  int mode_index(const std::string &name) const;
};

using ModelPtr = std::shared_ptr<const ProcessModel>;

/// Inverse-transform draw from the stationary telegraph law: position with
/// density (b-a)/2 exp(-(b-a)|x|). The mode is drawn separately.
double telegraph_invariant_position(double u, double a, double b);

/// Stationary telegraph mark: position from `telegraph_invariant_position`,
/// mode uniform on {-1, +1}.
Mark telegraph_invariant_sample(Rng &rng, double a, double b);

enum class InitialLaw { stationary, fixed };

/// One-dimensional telegraph process. Modes: index 0 is velocity -1, index 1
/// is velocity +1. Switching rate a when x*y <= 0 and b when x*y > 0.
ModelPtr make_telegraph1d(double a, double b, InitialLaw init = InitialLaw::stationary,
                          Mark fixed_start = {{0.0, 0.0}, 1});

/// Double-well potential U(x) = 0.05 (x^4 + x^3 - 4 x^2) and its derivative.
double pdsa_default_potential(double x);
double pdsa_default_potential_derivative(double x);

/// Piecewise deterministic simulated annealing with rate beta [y U'(x)]_+.
/// The stationary initial law samples the Gibbs density exp(-beta U)/Z by
/// tabulated inverse CDF.
ModelPtr make_pdsa(double beta, std::function<double(double)> potential = pdsa_default_potential,
                   std::function<double(double)> potential_derivative = pdsa_default_potential_derivative,
                   InitialLaw init = InitialLaw::stationary, Mark fixed_start = {{0.0, 0.0}, 1});

/// Cardinal modes of the two-dimensional telegraph process.
enum Cardinal : int { north = 0, south = 1, east = 2, west = 3 };
enum class Quadrant { ne, se, sw, nw };

Quadrant quadrant_of(Vec2 x);

/// Rate of the switch y -> target at position x for the two-dimensional
/// telegraph process.
double telegraph2d_rate(Vec2 x, int from, int to, double a, double b);

/// Two-dimensional telegraph process started at the origin with a uniformly
/// drawn cardinal mode.
ModelPtr make_telegraph2d(double a, double b);

/// Constant-velocity process with no jumps; handy as a deterministic oracle.
ModelPtr make_deterministic(int dim, Vec2 start, Vec2 velocity);

/// Z = integral of exp(-beta U(x)) over [lo, hi] by adaptive Simpson.
double gibbs_normalizer(double beta, const std::function<double(double)> &potential, double lo = -10.0,
                        double hi = 10.0, double tol = 1e-12);

} // namespace psp
