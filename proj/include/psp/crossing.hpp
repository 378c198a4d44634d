#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psp/simulate.hpp"
#include "psp/surfaces.hpp"

namespace psp {

/// Continuous-crossing count. In 2D, "upward" means moving along the surface
/// normal (outward for closed surfaces).
struct CrossingCount {
  long total = 0;
  long upward = 0;
  long downward = 0;
  /// Crossing times; filled by the exact counter only.
  std::vector<double> times;
  /// Near-tangent roots collapsed to a single crossing.
  long tangency_warnings = 0;

  CrossingCount &operator+=(const CrossingCount &o);
};

struct LocalTimeEstimate {
  double delta = 0.0;
  double value = 0.0;
};

/// Strict sign changes of z_j - x between consecutive samples. A sample
/// exactly on the level never contributes (the product test is strict).
CrossingCount count_level_grid(const GridTrajectory &traj, const Level &level);

/// Four-determinant proper intersection test between chords [P Q] and [A B]:
/// det(B-A, P-A) det(B-A, Q-A) < 0 and det(Q-P, A-P) det(Q-P, B-P) < 0.
bool chord_crosses_segment(Vec2 p, Vec2 q, Vec2 a, Vec2 b);

/// Number of consecutive sample chords properly intersecting the segment.
CrossingCount count_segment_grid(const GridTrajectory &traj, const Segment &seg);

/// Grid count against any surface; a polyline sums its segments, so a chord
/// is counted once per intersected edge.
CrossingCount count_grid(const GridTrajectory &traj, const Surface &surface);

struct ExactCountOptions {
  /// Root tolerance in time; roots closer than this collapse to one.
  double root_tol = 1e-10;
  /// Sign-sampling subgrid per arc for non-linear flows.
  int subgrid = 64;
  /// Distance under which a jump point is considered to lie on the surface.
  double jump_tol = 1e-12;
  /// |(r, nu)| under which a root is flagged as tangent.
  double tangency_tol = 1e-8;
};

/// Exact continuous-crossing count of an event-level path. Constant-velocity
/// arcs are solved in closed form; other arcs use sign sampling and bisection.
/// Throws DataError when a jump lands on the surface.
CrossingCount count_exact(const EventTrajectory &traj, const Surface &surface, const ExactCountOptions &opts = {});

/// (1/2 delta) * int_0^H |f'(t)| 1{|f(t) - level| <= delta} dt by the composite
/// trapezoid rule, with the window indicator clipped exactly on each step
/// using the linear interpolant of f.
double kac_numeric(const std::function<double(double)> &f, const std::function<double(double)> &fprime,
                   double horizon, double level, double delta, double time_step);

/// (1/2 delta) times the time spent in the closed delta-window (or delta-tube)
/// around the surface, by the left rectangle rule on the grid. With `mode`,
/// only samples whose recorded mode matches are counted.
LocalTimeEstimate local_time(const GridTrajectory &traj, const Surface &surface, double delta,
                             std::optional<int> mode = std::nullopt);

} // namespace psp
