#pragma once

// Data-parallel kernels behind the estimators. Every kernel has a serial
// reference and an OpenMP version; both accumulate in the same order, so
// their results are bitwise identical and the tests compare them exactly.

#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <vector>

#include "psp/crossing.hpp"
#include "psp/density.hpp"
#include "psp/simulate.hpp"

namespace psp::kernels {

/// Samples of every time slice stored contiguously: slice j occupies
/// values[offsets[j] .. offsets[j+1]).
struct SliceSet {
  int dim = 1;
  std::vector<Vec2> values;
  std::vector<std::size_t> offsets;

  std::size_t count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const Vec2> slice(std::size_t j) const {
    return {values.data() + offsets[j], offsets[j + 1] - offsets[j]};
  }
};

/// Slice j holds z_i^j for all trajectories i.
SliceSet time_slices(const Dataset &dataset);
/// Slice i holds the whole trajectory i.
SliceSet trajectory_slices(const Dataset &dataset);

/// out[k] = sum_j weights[j] * kde_j(points[k]). Slices without a bandwidth
/// (exact atoms away from the points) contribute nothing.
std::vector<double> time_integrated_density_serial(const SliceSet &slices,
                                                   std::span<const std::optional<Bandwidth>> bandwidths,
                                                   std::span<const double> weights, std::span<const Vec2> points);
std::vector<double> time_integrated_density_parallel(const SliceSet &slices,
                                                     std::span<const std::optional<Bandwidth>> bandwidths,
                                                     std::span<const double> weights, std::span<const Vec2> points);

/// out[i] = sum_k point_weights[k] * kde_i(points[k]) where kde_i is built on
/// slice i with bandwidths[i].
std::vector<double> weighted_density_serial(const SliceSet &slices, std::span<const Bandwidth> bandwidths,
                                            std::span<const Vec2> points, std::span<const double> point_weights);
std::vector<double> weighted_density_parallel(const SliceSet &slices, std::span<const Bandwidth> bandwidths,
                                              std::span<const Vec2> points, std::span<const double> point_weights);

/// Simulates trajectories index_begin .. index_begin+n-1 of a replicate, each
/// on its own stream.
std::vector<EventTrajectory> simulate_batch_serial(const ModelPtr &model, double horizon, std::uint64_t seed,
                                                   std::uint64_t replicate, std::size_t n,
                                                   const SimulationOptions &opts = {});
std::vector<EventTrajectory> simulate_batch_parallel(const ModelPtr &model, double horizon, std::uint64_t seed,
                                                     std::uint64_t replicate, std::size_t n,
                                                     const SimulationOptions &opts = {});

Dataset sample_batch_parallel(std::span<const EventTrajectory> trajs, std::size_t n_points);

std::vector<CrossingCount> count_exact_serial(std::span<const EventTrajectory> trajs, const Surface &surface);
std::vector<CrossingCount> count_exact_parallel(std::span<const EventTrajectory> trajs, const Surface &surface);

/// Runs body(i) for i in [0, n) in parallel and rethrows the first exception
/// (lowest index) on the calling thread.
template <class Body> void parallel_for_rethrow(std::size_t n, Body body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Applies PSPX_THREADS (if set) to the OpenMP runtime; returns the thread
/// count in effect.
int configure_threads_from_env();

} // namespace psp::kernels
