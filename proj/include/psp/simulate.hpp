#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "psp/model.hpp"

namespace psp {

struct Event {
  double time = 0.0;
  Vec2 x;
  int mode = 0;
};

/// Exact event-level path on [0, horizon]. `events[0]` is the initial mark at
/// time 0; each later entry is a jump. Between events the state follows the
/// flow of the mode recorded at the arc's start.
struct EventTrajectory {
  ModelPtr model;
  double horizon = 0.0;
  std::vector<Event> events;

  Vec2 state_at(double t) const;
  int mode_at(double t) const;
  /// Index of the arc active at time t (right-continuous at jumps).
  std::size_t arc_index(double t) const;
  /// End time of arc i (next jump time, or the horizon).
  double arc_end(std::size_t i) const;
};

/// Regular-grid observation of one trajectory: sample j is taken at time
/// horizon * j / (n - 1).
struct GridTrajectory {
  int dim = 1;
  double horizon = 0.0;
  std::vector<Vec2> samples;
  /// Optional; empty when the data carries no velocities.
  std::vector<Vec2> velocities;
  /// Optional mode index per sample; empty when unobserved.
  std::vector<int> modes;

  std::size_t size() const { return samples.size(); }
  double step() const { return horizon / static_cast<double>(samples.size() - 1); }
  double time(std::size_t j) const { return horizon * static_cast<double>(j) / static_cast<double>(samples.size() - 1); }
};

using Dataset = std::vector<GridTrajectory>;

struct SimulationOptions {
  /// Lookahead window of the thinning bound.
  double window = 0.1;
  int bound_subgrid = 16;
  double bound_safety = 1.5;
  int max_refinements = 30;
  std::size_t max_events = 1'000'000;
};

/// Simulates one exact trajectory on [0, horizon]. Uses rate inversion when
/// the model registers a piecewise-constant rate schedule, thinning otherwise.
EventTrajectory simulate_event(const ModelPtr &model, Rng &rng, double horizon, const SimulationOptions &opts = {});

/// Convenience overload drawing from `make_stream(seed, replicate, index)`.
EventTrajectory simulate_event(const ModelPtr &model, std::uint64_t seed, std::uint64_t replicate,
                               std::uint64_t index, double horizon, const SimulationOptions &opts = {});

GridTrajectory sample_grid(const EventTrajectory &traj, std::size_t n_points);

/// Number of grid points for horizon H and step h; rejects steps that do not
/// divide the horizon.
std::size_t grid_points_for_step(double horizon, double step);

} // namespace psp
