#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psp/density.hpp"
#include "psp/model.hpp"
#include "psp/simulate.hpp"
#include "psp/surfaces.hpp"

namespace psp {

/// Positive and negative parts of (r(x), nu(x)).
struct ProjectionParts {
  double positive = 0.0;
  double negative = 0.0;
  double magnitude() const { return positive + negative; }
};

ProjectionParts split_projection(double value);

/// Speed projection evaluated at surface quadrature nodes.
class SpeedProjection {
public:
  enum class Source { model_derived, data_estimated };
  using Eval = std::function<ProjectionParts(const SurfaceNode &)>;

  SpeedProjection(Eval eval, Source source);

  ProjectionParts operator()(const SurfaceNode &node) const { return eval_(node); }
  Source source() const { return source_; }
  /// Both parts multiplied by factor (> 0).
  SpeedProjection scaled(double factor) const;

  static SpeedProjection constant(double positive, double negative, Source source = Source::model_derived);
  /// (r(x), nu(x)) for a single known vector field.
  static SpeedProjection from_field(std::function<Vec2(Vec2)> field);
  /// Mode-summed model projection sum_y w_y(x) (r_y(x), nu(x))_+-, where the
  /// occupancy w_y(x) is the kernel-weighted share of samples near x recorded
  /// in mode y (samples' own velocities when modes are absent).
  static SpeedProjection from_mode_occupancy(const ModelPtr &model, const Dataset &dataset,
                                             BandwidthMethod method = BandwidthMethod::automatic);

private:
  Eval eval_;
  Source source_;
};

std::string to_string(SpeedProjection::Source s);

struct EstimateMeta {
  std::size_t n = 0;
  std::size_t n_h = 0;
  double h = 0.0;
  double delta = 0.0;
  std::string bandwidth;
  std::uint64_t seed = 0;
  std::optional<double> se;
  std::string note;
};

struct CrossingEstimate {
  double value = 0.0;
  std::string method;
  EstimateMeta meta;
};

enum class TimeRule { rectangle, trapezoid };
TimeRule parse_time_rule(const std::string &name);

struct KacRiceOptions {
  BandwidthMethod bandwidth = BandwidthMethod::automatic;
  /// Default: the displayed estimator's weights H/(n_H-1) on all n_H slices.
  TimeRule time_rule = TimeRule::rectangle;
  /// Surface quadrature step.
  double quad_step = 0.1;
};

/// Mean grid crossing count over the dataset.
CrossingEstimate monte_carlo(const Dataset &dataset, const Surface &surface);

/// Integral over S of |(r, nu)| times the rectangle-rule time integral of the
/// slice-wise KDE. Slices whose samples collapse to a single point off the
/// surface are treated as exact atoms (zero density on S).
CrossingEstimate kr_nonstationary(const Dataset &dataset, const Surface &surface, const SpeedProjection &sp,
                                  const KacRiceOptions &opts = {});

struct StationaryEstimate {
  std::vector<CrossingEstimate> per_trajectory;
  CrossingEstimate mean;
};

/// H times the integral over S of |(r, nu)| against a per-trajectory KDE of
/// the invariant density, averaged across trajectories.
StationaryEstimate kr_stationary(const Dataset &dataset, const Surface &surface, const SpeedProjection &sp,
                                 const KacRiceOptions &opts = {});

/// Analytic stationary count of the one-dimensional telegraph process:
/// H (b-a)/2 exp(-(b-a)|x|).
double telegraph_stationary_count(double a, double b, double level, double horizon);

/// Stationary Kac-Rice value H sum_y w_y int_S |(r_y, nu)| p dsigma from the
/// model's registered invariant law; throws UsageError when none is known.
CrossingEstimate closed_form(const ProcessModel &model, const Surface &surface, double horizon,
                             double quad_step = 0.1);

/// Mean exact crossing count over n_ref fresh simulations, with its standard
/// error.
CrossingEstimate exact_oracle(const ModelPtr &model, const Surface &surface, double horizon, std::size_t n_ref,
                              std::uint64_t seed);

} // namespace psp
