#include "psp/kernels.hpp"

#include <cstdlib>
#include <exception>
#include <string>

#include <omp.h>

#include "psp/errors.hpp"

namespace psp::kernels {

SliceSet time_slices(const Dataset &dataset) {
  const auto n_h = common_grid_size(dataset);
  SliceSet s;
  s.dim = dataset.front().dim;
  s.values.reserve(n_h * dataset.size());
  s.offsets.reserve(n_h + 1);
  s.offsets.push_back(0);
  for (std::size_t j = 0; j < n_h; ++j) {
    for (const auto &t : dataset) s.values.push_back(t.samples[j]);
    s.offsets.push_back(s.values.size());
  }
  return s;
}

SliceSet trajectory_slices(const Dataset &dataset) {
  if (dataset.empty()) throw DataError("dataset is empty");
  SliceSet s;
  s.dim = dataset.front().dim;
  s.offsets.push_back(0);
  for (const auto &t : dataset) {
    s.values.insert(s.values.end(), t.samples.begin(), t.samples.end());
    s.offsets.push_back(s.values.size());
  }
  return s;
}

namespace {

void check_sizes(const SliceSet &slices, std::size_t bandwidths, std::size_t weights) {
  if (bandwidths != slices.count() || weights != slices.count()) {
    throw UsageError("slice, bandwidth and weight counts differ");
  }
}

} // namespace

std::vector<double> time_integrated_density_serial(const SliceSet &slices,
                                                   std::span<const std::optional<Bandwidth>> bandwidths,
                                                   std::span<const double> weights, std::span<const Vec2> points) {
  check_sizes(slices, bandwidths.size(), weights.size());
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t j = 0; j < slices.count(); ++j) {
    if (!bandwidths[j]) continue;
    for (std::size_t k = 0; k < points.size(); ++k) {
      out[k] += weights[j] * gaussian_kde_sum(slices.slice(j), slices.dim, *bandwidths[j], points[k]);
    }
  }
  return out;
}

std::vector<double> time_integrated_density_parallel(const SliceSet &slices,
                                                     std::span<const std::optional<Bandwidth>> bandwidths,
                                                     std::span<const double> weights, std::span<const Vec2> points) {
  check_sizes(slices, bandwidths.size(), weights.size());
  const std::size_t m = slices.count();
  const std::size_t p = points.size();
  std::vector<double> rows(m * p, 0.0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t j = 0; j < m; ++j) {
    if (!bandwidths[j]) continue;
    for (std::size_t k = 0; k < p; ++k) {
      rows[j * p + k] = weights[j] * gaussian_kde_sum(slices.slice(j), slices.dim, *bandwidths[j], points[k]);
    }
  }
  std::vector<double> out(p, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (!bandwidths[j]) continue;
    for (std::size_t k = 0; k < p; ++k) out[k] += rows[j * p + k];
  }
  return out;
}

std::vector<double> weighted_density_serial(const SliceSet &slices, std::span<const Bandwidth> bandwidths,
                                            std::span<const Vec2> points, std::span<const double> point_weights) {
  std::vector<double> out(slices.count(), 0.0);
  for (std::size_t i = 0; i < slices.count(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      s += point_weights[k] * gaussian_kde_sum(slices.slice(i), slices.dim, bandwidths[i], points[k]);
    }
    out[i] = s;
  }
  return out;
}

std::vector<double> weighted_density_parallel(const SliceSet &slices, std::span<const Bandwidth> bandwidths,
                                              std::span<const Vec2> points, std::span<const double> point_weights) {
  const std::size_t m = slices.count();
  std::vector<double> out(m, 0.0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      s += point_weights[k] * gaussian_kde_sum(slices.slice(i), slices.dim, bandwidths[i], points[k]);
    }
    out[i] = s;
  }
  return out;
}

std::vector<EventTrajectory> simulate_batch_serial(const ModelPtr &model, double horizon, std::uint64_t seed,
                                                   std::uint64_t replicate, std::size_t n,
                                                   const SimulationOptions &opts) {
  std::vector<EventTrajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(simulate_event(model, seed, replicate, i, horizon, opts));
  return out;
}

std::vector<EventTrajectory> simulate_batch_parallel(const ModelPtr &model, double horizon, std::uint64_t seed,
                                                     std::uint64_t replicate, std::size_t n,
                                                     const SimulationOptions &opts) {
  std::vector<EventTrajectory> out(n);
  parallel_for_rethrow(n, [&](std::size_t i) { out[i] = simulate_event(model, seed, replicate, i, horizon, opts); });
  return out;
}

Dataset sample_batch_parallel(std::span<const EventTrajectory> trajs, std::size_t n_points) {
  Dataset out(trajs.size());
  parallel_for_rethrow(trajs.size(), [&](std::size_t i) { out[i] = sample_grid(trajs[i], n_points); });
  return out;
}

std::vector<CrossingCount> count_exact_serial(std::span<const EventTrajectory> trajs, const Surface &surface) {
  std::vector<CrossingCount> out;
  out.reserve(trajs.size());
  for (const auto &t : trajs) out.push_back(count_exact(t, surface));
  return out;
}

std::vector<CrossingCount> count_exact_parallel(std::span<const EventTrajectory> trajs, const Surface &surface) {
  std::vector<CrossingCount> out(trajs.size());
  parallel_for_rethrow(trajs.size(), [&](std::size_t i) { out[i] = count_exact(trajs[i], surface); });
  return out;
}

int configure_threads_from_env() {
  if (const char *env = std::getenv("PSPX_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception &) {
      throw UsageError(std::string("PSPX_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  return omp_get_max_threads();
}

} // namespace psp::kernels
