#include "psp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psp/errors.hpp"

namespace psp {

std::size_t EventTrajectory::arc_index(double t) const {
  // Last event with time <= t.
  const auto it = std::upper_bound(events.begin(), events.end(), t,
                                   [](double v, const Event &e) { return v < e.time; });
  if (it == events.begin()) return 0;
  return static_cast<std::size_t>(it - events.begin()) - 1;
}

double EventTrajectory::arc_end(std::size_t i) const {
  return i + 1 < events.size() ? events[i + 1].time : horizon;
}

Vec2 EventTrajectory::state_at(double t) const {
  const auto i = arc_index(t);
  const Event &e = events[i];
  return model->flow(e.mode)(e.x, t - e.time);
}

int EventTrajectory::mode_at(double t) const { return events[arc_index(t)].mode; }

namespace {

/// Time to the next jump from (x, mode) by inverting the piecewise-constant
/// integrated rate. Returns +inf when no jump happens before `remaining`.
double next_jump_inversion(const ProcessModel &m, Vec2 x, int mode, double remaining, Rng &rng) {
  double budget = rng.exponential(1.0);
  double elapsed = 0.0;
  const Flow &flow = m.flow(mode);
  for (int pieces = 0; pieces < 1'000'000; ++pieces) {
    const RatePiece p = m.rate_piece(x, mode);
    if (p.rate < 0.0) throw NumericError("negative jump rate in model " + m.id);
    if (p.rate > 0.0 && p.rate * p.valid_for >= budget) return elapsed + budget / p.rate;
    if (!std::isfinite(p.valid_for)) return std::numeric_limits<double>::infinity();
    budget -= p.rate * p.valid_for;
    elapsed += p.valid_for;
    if (elapsed >= remaining) return std::numeric_limits<double>::infinity();
    x = flow(x, p.valid_for);
  }
  throw NumericError("rate schedule of model " + m.id + " does not advance");
}

/// Thinning against a local bound: max of the rate on a subgrid of the
/// lookahead window times a safety factor. A candidate whose rate exceeds the
/// bound triggers a bound refinement of the current window.
double next_jump_thinning(const ProcessModel &m, Vec2 x, int mode, double remaining, Rng &rng,
                          const SimulationOptions &opts) {
  const Flow &flow = m.flow(mode);
  double elapsed = 0.0;
  while (elapsed < remaining) {
    const double w = std::min(opts.window, remaining - elapsed);
    double peak = 0.0;
    for (int k = 0; k < opts.bound_subgrid; ++k) {
      const double s = w * k / (opts.bound_subgrid - 1);
      const double r = m.rate(flow(x, s), mode);
      if (!(r >= 0.0)) throw NumericError("jump rate is negative or NaN in model " + m.id);
      peak = std::max(peak, r);
    }
    double bound = opts.bound_safety * peak;
    if (bound == 0.0) {
      x = flow(x, w);
      elapsed += w;
      continue;
    }
    // Replaying the window from the same stream state after a refinement is
    // equivalent to having used the refined bound from the start.
    const Rng snapshot = rng;
    int refinements = 0;
    double local = 0.0;
    while (true) {
      const double tau = rng.exponential(bound);
      if (local + tau >= w) break;
      local += tau;
      const double r = m.rate(flow(x, local), mode);
      if (r > bound) {
        if (++refinements > opts.max_refinements) {
          throw NumericError("thinning bound refinement limit reached; the model rate is mis-specified");
        }
        bound *= 2.0;
        rng = snapshot;
        local = 0.0;
        continue;
      }
      if (rng.uniform() * bound < r) return elapsed + local;
    }
    x = flow(x, w);
    elapsed += w;
  }
  return std::numeric_limits<double>::infinity();
}

} // namespace

EventTrajectory simulate_event(const ModelPtr &model, Rng &rng, double horizon, const SimulationOptions &opts) {
  if (!(horizon > 0.0)) throw UsageError("horizon must be positive");
  const ProcessModel &m = *model;
  EventTrajectory traj;
  traj.model = model;
  traj.horizon = horizon;
  const Mark start = m.initial(rng);
  traj.events.push_back({0.0, start.x, start.mode});

  double t = 0.0;
  Vec2 x = start.x;
  int mode = start.mode;
  while (true) {
    const double remaining = horizon - t;
    const double dt = m.rate_piece ? next_jump_inversion(m, x, mode, remaining, rng)
                                   : next_jump_thinning(m, x, mode, remaining, rng, opts);
    if (!(dt < remaining)) break;
    if (!(dt > 0.0)) {
      throw NumericError("simultaneous jumps at t=" + std::to_string(t) + " in model " + m.id);
    }
    const Vec2 pre = m.flow(mode)(x, dt);
    const Mark next = m.transition(pre, mode, rng);
    t += dt;
    x = next.x;
    mode = next.mode;
    traj.events.push_back({t, x, mode});
    if (traj.events.size() > opts.max_events) {
      throw NumericError("event count exceeded " + std::to_string(opts.max_events) + "; explosive jump rate in model " +
                         m.id);
    }
  }
  return traj;
}

EventTrajectory simulate_event(const ModelPtr &model, std::uint64_t seed, std::uint64_t replicate,
                               std::uint64_t index, double horizon, const SimulationOptions &opts) {
  Rng rng = make_stream(seed, replicate, index);
  return simulate_event(model, rng, horizon, opts);
}

GridTrajectory sample_grid(const EventTrajectory &traj, std::size_t n_points) {
  if (n_points < 2) throw UsageError("grid needs at least 2 points");
  const ProcessModel &m = *traj.model;
  GridTrajectory g;
  g.dim = m.dim;
  g.horizon = traj.horizon;
  g.samples.resize(n_points);
  g.velocities.resize(n_points);
  g.modes.resize(n_points);
  std::size_t arc = 0;
  for (std::size_t j = 0; j < n_points; ++j) {
    const double t = j + 1 == n_points ? traj.horizon
                                       : traj.horizon * static_cast<double>(j) / static_cast<double>(n_points - 1);
    while (arc + 1 < traj.events.size() && traj.events[arc + 1].time <= t) ++arc;
    const Event &e = traj.events[arc];
    const Flow &flow = m.flow(e.mode);
    g.samples[j] = flow(e.x, t - e.time);
    g.velocities[j] = flow.velocity(g.samples[j]);
    g.modes[j] = e.mode;
  }
  return g;
}

std::size_t grid_points_for_step(double horizon, double step) {
  if (!(step > 0.0) || !(horizon > 0.0)) throw UsageError("grid step and horizon must be positive");
  const double intervals = horizon / step;
  const double rounded = std::round(intervals);
  if (rounded < 1.0 || std::abs(rounded * step - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw UsageError("grid step h does not divide horizon H (h*(n_H-1) must equal H within 1e-9)");
  }
  return static_cast<std::size_t>(rounded) + 1;
}

} // namespace psp
