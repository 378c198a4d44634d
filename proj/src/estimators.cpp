#include "psp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "psp/crossing.hpp"
#include "psp/errors.hpp"
#include "psp/kernels.hpp"
#include "psp/stats.hpp"

namespace psp {

ProjectionParts split_projection(double value) { return {std::max(0.0, value), std::max(0.0, -value)}; }

SpeedProjection::SpeedProjection(Eval eval, Source source) : eval_(std::move(eval)), source_(source) {}

SpeedProjection SpeedProjection::scaled(double factor) const {
  if (!(factor > 0.0)) throw UsageError("speed projection scale must be positive");
  return SpeedProjection(
      [inner = eval_, factor](const SurfaceNode &node) {
        const auto p = inner(node);
        return ProjectionParts{factor * p.positive, factor * p.negative};
      },
      source_);
}

SpeedProjection SpeedProjection::constant(double positive, double negative, Source source) {
  if (positive < 0.0 || negative < 0.0) throw UsageError("speed projection parts must be nonnegative");
  return SpeedProjection([positive, negative](const SurfaceNode &) { return ProjectionParts{positive, negative}; },
                         source);
}

SpeedProjection SpeedProjection::from_field(std::function<Vec2(Vec2)> field) {
  return SpeedProjection(
      [field = std::move(field)](const SurfaceNode &node) {
        return split_projection(dot(field(node.point), node.normal));
      },
      Source::model_derived);
}

SpeedProjection SpeedProjection::from_mode_occupancy(const ModelPtr &model, const Dataset &dataset,
                                                     BandwidthMethod method) {
  if (dataset.empty()) throw DataError("dataset is empty");
  struct Pool {
    int dim;
    std::vector<Vec2> points;
    std::vector<int> modes;
    std::vector<Vec2> velocities;
    std::optional<Bandwidth> bw;
  };
  auto pool = std::make_shared<Pool>();
  pool->dim = dataset.front().dim;
  for (const auto &t : dataset) {
    const bool has_modes = t.modes.size() == t.samples.size();
    if (!has_modes && t.velocities.size() != t.samples.size()) {
      throw DataError("mode occupancy needs recorded modes or velocities");
    }
    for (std::size_t j = 0; j < t.samples.size(); ++j) {
      pool->points.push_back(t.samples[j]);
      pool->modes.push_back(has_modes ? t.modes[j] : -1);
      pool->velocities.push_back(has_modes ? Vec2{} : t.velocities[j]);
    }
  }
  pool->bw = select_bandwidth(pool->points, pool->dim, method);
  return SpeedProjection(
      [pool, model](const SurfaceNode &node) {
        double wsum = 0.0, pos = 0.0, neg = 0.0;
        // Mode projections at the node, cached per mode.
        std::vector<double> proj(model ? model->mode_count() : 0);
        for (std::size_t y = 0; y < proj.size(); ++y) {
          proj[y] = dot(model->flow(static_cast<int>(y)).velocity(node.point), node.normal);
        }
        for (std::size_t i = 0; i < pool->points.size(); ++i) {
          const double w = std::exp(-0.5 * pool->bw->inverse_quadratic(node.point - pool->points[i]));
          if (w == 0.0) continue;
          const int y = pool->modes[i];
          const double v = y >= 0 ? proj.at(static_cast<std::size_t>(y)) : dot(pool->velocities[i], node.normal);
          wsum += w;
          pos += w * std::max(0.0, v);
          neg += w * std::max(0.0, -v);
        }
        if (!(wsum > 0.0)) return ProjectionParts{};
        return ProjectionParts{pos / wsum, neg / wsum};
      },
      Source::model_derived);
}

std::string to_string(SpeedProjection::Source s) {
  return s == SpeedProjection::Source::model_derived ? "model-derived" : "data-estimated";
}

TimeRule parse_time_rule(const std::string &name) {
  if (name == "rectangle") return TimeRule::rectangle;
  if (name == "trapezoid") return TimeRule::trapezoid;
  throw UsageError("unknown time quadrature '" + name + "' (expected rectangle or trapezoid)");
}

CrossingEstimate monte_carlo(const Dataset &dataset, const Surface &surface) {
  if (dataset.empty()) throw DataError("monte_carlo needs at least one trajectory");
  std::vector<double> counts;
  counts.reserve(dataset.size());
  for (const auto &t : dataset) counts.push_back(static_cast<double>(count_grid(t, surface).total));
  CrossingEstimate e;
  e.value = stats::mean(counts);
  e.method = "monte_carlo";
  e.meta.n = dataset.size();
  e.meta.n_h = dataset.front().size();
  e.meta.h = dataset.front().step();
  e.meta.se = counts.size() > 1 ? stats::sd(counts) / std::sqrt(static_cast<double>(counts.size())) : 0.0;
  return e;
}

namespace {

struct NodeSet {
  std::vector<SurfaceNode> nodes;
  std::vector<Vec2> points;
  std::vector<double> weights;  // quadrature weight times |(r, nu)|
};

NodeSet weighted_nodes(const Surface &surface, const SpeedProjection &sp, double quad_step) {
  NodeSet s;
  s.nodes = quadrature_nodes(surface, quad_step);
  for (const auto &node : s.nodes) {
    const auto parts = sp(node);
    if (parts.positive < 0.0 || parts.negative < 0.0 || !std::isfinite(parts.magnitude())) {
      throw NumericError("speed projection must be finite and nonnegative");
    }
    s.points.push_back(node.point);
    s.weights.push_back(node.weight * parts.magnitude());
  }
  return s;
}

void check_dimension(const Dataset &dataset, const Surface &surface) {
  if (dataset.front().dim != surface_dim(surface)) {
    throw UsageError("surface dimension does not match the dataset");
  }
}

} // namespace

CrossingEstimate kr_nonstationary(const Dataset &dataset, const Surface &surface, const SpeedProjection &sp,
                                  const KacRiceOptions &opts) {
  const auto n_h = common_grid_size(dataset);
  check_dimension(dataset, surface);
  if (n_h < 2) throw DataError("grid needs at least 2 points");
  const double horizon = dataset.front().horizon;
  const double step = horizon / static_cast<double>(n_h - 1);
  const auto slices = kernels::time_slices(dataset);

  std::vector<std::optional<Bandwidth>> bws(n_h);
  std::vector<double> hs;
  std::size_t atoms = 0;
  for (std::size_t j = 0; j < n_h; ++j) {
    const auto values = slices.slice(j);
    try {
      bws[j] = select_bandwidth(values, slices.dim, opts.bandwidth);
      hs.push_back(bws[j]->h());
    } catch (const DegenerateSamplesError &) {
      const bool single_point =
          std::all_of(values.begin(), values.end(), [&](Vec2 z) { return z == values.front(); });
      if (!single_point) throw;
      if (distance_to(surface, values.front()) <= 1e-12) {
        throw NumericError("time slice " + std::to_string(j) + " is an exact atom on the surface");
      }
      ++atoms;
    }
  }
  std::vector<double> weights(n_h, step);
  if (opts.time_rule == TimeRule::trapezoid) {
    weights.front() *= 0.5;
    weights.back() *= 0.5;
  }
  const auto nodes = weighted_nodes(surface, sp, opts.quad_step);
  const auto integrated = kernels::time_integrated_density_parallel(slices, bws, weights, nodes.points);
  double value = 0.0;
  for (std::size_t k = 0; k < integrated.size(); ++k) value += nodes.weights[k] * integrated[k];

  CrossingEstimate e;
  e.value = value;
  e.method = "kr_nonstationary";
  e.meta.n = dataset.size();
  e.meta.n_h = n_h;
  e.meta.h = step;
  e.meta.delta = std::holds_alternative<Level>(surface) ? 0.0 : opts.quad_step;
  std::ostringstream os;
  os.precision(6);
  os << to_string(opts.bandwidth) << " median_h=" << (hs.empty() ? 0.0 : stats::quantile(hs, 0.5));
  e.meta.bandwidth = os.str();
  if (atoms > 0) e.meta.note = std::to_string(atoms) + " atomic time slice(s)";
  return e;
}

StationaryEstimate kr_stationary(const Dataset &dataset, const Surface &surface, const SpeedProjection &sp,
                                 const KacRiceOptions &opts) {
  if (dataset.empty()) throw DataError("kr_stationary needs at least one trajectory");
  check_dimension(dataset, surface);
  const auto slices = kernels::trajectory_slices(dataset);
  std::vector<Bandwidth> bws;
  bws.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    bws.push_back(select_bandwidth(slices.slice(i), slices.dim, opts.bandwidth));
  }
  const auto nodes = weighted_nodes(surface, sp, opts.quad_step);
  const auto per = kernels::weighted_density_parallel(slices, bws, nodes.points, nodes.weights);

  StationaryEstimate out;
  std::vector<double> values;
  std::vector<double> hs;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    CrossingEstimate e;
    e.value = dataset[i].horizon * per[i];
    e.method = "kr_stationary";
    e.meta.n = 1;
    e.meta.n_h = dataset[i].size();
    e.meta.h = dataset[i].step();
    e.meta.bandwidth = bws[i].summary();
    values.push_back(e.value);
    hs.push_back(bws[i].h());
    out.per_trajectory.push_back(std::move(e));
  }
  out.mean.value = stats::mean(values);
  out.mean.method = "kr_stationary";
  out.mean.meta.n = dataset.size();
  out.mean.meta.n_h = dataset.front().size();
  out.mean.meta.h = dataset.front().step();
  out.mean.meta.delta = std::holds_alternative<Level>(surface) ? 0.0 : opts.quad_step;
  out.mean.meta.se = values.size() > 1 ? stats::sd(values) / std::sqrt(static_cast<double>(values.size())) : 0.0;
  std::ostringstream os;
  os.precision(6);
  os << to_string(opts.bandwidth) << " median_h=" << stats::quantile(hs, 0.5);
  out.mean.meta.bandwidth = os.str();
  return out;
}

double telegraph_stationary_count(double a, double b, double level, double horizon) {
  if (!(b > a && a > 0.0)) throw UsageError("telegraph requires b > a > 0");
  return horizon * 0.5 * (b - a) * std::exp(-(b - a) * std::abs(level));
}

CrossingEstimate closed_form(const ProcessModel &model, const Surface &surface, double horizon, double quad_step) {
  if (!model.invariant) throw UsageError("no registered invariant density for process " + model.id);
  if (surface_dim(surface) != model.dim) throw UsageError("surface dimension does not match the process");
  const auto &inv = *model.invariant;
  double value = 0.0;
  for (const auto &node : quadrature_nodes(surface, quad_step)) {
    const double p = inv.density(node.point);
    double speed = 0.0;
    for (std::size_t y = 0; y < model.mode_count(); ++y) {
      const double r = dot(model.flow(static_cast<int>(y)).velocity(node.point), node.normal);
      speed += inv.mode_weights.at(y) * std::abs(r);
    }
    value += node.weight * speed * p;
  }
  CrossingEstimate e;
  e.value = horizon * value;
  e.method = "closed_form";
  e.meta.delta = std::holds_alternative<Level>(surface) ? 0.0 : quad_step;
  return e;
}

CrossingEstimate exact_oracle(const ModelPtr &model, const Surface &surface, double horizon, std::size_t n_ref,
                              std::uint64_t seed) {
  if (n_ref < 1) throw UsageError("n_ref must be at least 1");
  // Oracle streams live in their own replicate slot so they never coincide
  // with experiment data drawn from the same base seed.
  constexpr std::uint64_t oracle_slot = 0x6f7261636c65ULL;
  const auto trajs = kernels::simulate_batch_parallel(model, horizon, seed, oracle_slot, n_ref);
  const auto counts = kernels::count_exact_parallel(trajs, surface);
  std::vector<double> values;
  values.reserve(counts.size());
  long tangencies = 0;
  for (const auto &c : counts) {
    values.push_back(static_cast<double>(c.total));
    tangencies += c.tangency_warnings;
  }
  CrossingEstimate e;
  e.value = stats::mean(values);
  e.method = "exact_oracle";
  e.meta.n = n_ref;
  e.meta.seed = seed;
  e.meta.se = values.size() > 1 ? stats::sd(values) / std::sqrt(static_cast<double>(values.size())) : 0.0;
  if (tangencies > 0) e.meta.note = std::to_string(tangencies) + " tangency warning(s)";
  return e;
}

} // namespace psp
