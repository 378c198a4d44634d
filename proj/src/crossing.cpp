#include "psp/crossing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psp/errors.hpp"

namespace psp {

CrossingCount &CrossingCount::operator+=(const CrossingCount &o) {
  total += o.total;
  upward += o.upward;
  downward += o.downward;
  times.insert(times.end(), o.times.begin(), o.times.end());
  std::sort(times.begin(), times.end());
  tangency_warnings += o.tangency_warnings;
  return *this;
}

CrossingCount count_level_grid(const GridTrajectory &traj, const Level &level) {
  CrossingCount c;
  const auto &z = traj.samples;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) {
    const double d0 = z[j].x - level.x_star;
    const double d1 = z[j + 1].x - level.x_star;
    if (d0 * d1 < 0.0) {
      ++c.total;
      (d1 > 0.0 ? c.upward : c.downward)++;
    }
  }
  return c;
}

bool chord_crosses_segment(Vec2 p, Vec2 q, Vec2 a, Vec2 b) {
  const double d1 = cross(b - a, p - a);
  const double d2 = cross(b - a, q - a);
  const double d3 = cross(q - p, a - p);
  const double d4 = cross(q - p, b - p);
  return d1 * d2 < 0.0 && d3 * d4 < 0.0;
}

CrossingCount count_segment_grid(const GridTrajectory &traj, const Segment &seg) {
  CrossingCount c;
  const auto &z = traj.samples;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) {
    if (chord_crosses_segment(z[j], z[j + 1], seg.a(), seg.b())) {
      ++c.total;
      (seg.side(z[j + 1]) > 0.0 ? c.upward : c.downward)++;
    }
  }
  return c;
}

CrossingCount count_grid(const GridTrajectory &traj, const Surface &surface) {
  if (const auto *l = std::get_if<Level>(&surface)) return count_level_grid(traj, *l);
  if (traj.dim != 2) throw UsageError("segment crossing counts need a two-dimensional trajectory");
  if (const auto *g = std::get_if<Segment>(&surface)) return count_segment_grid(traj, *g);
  CrossingCount c;
  for (const auto &seg : std::get<PolylineSurface>(surface).segments) c += count_segment_grid(traj, seg);
  return c;
}

namespace {

struct Root {
  double t;
  bool upward;
};

void check_jump_off_surface(const Surface &surface, Vec2 x, double t, const ExactCountOptions &opts) {
  if (distance_to(surface, x) <= opts.jump_tol) {
    std::ostringstream os;
    os << "jump at t=" << t << " lands on " << describe(surface) << " (jumps onto the surface are not allowed)";
    throw DataError(os.str());
  }
}

/// Closed-form roots of a constant-velocity arc against one segment.
void segment_roots_linear(const Segment &seg, Vec2 x0, Vec2 v, double dur, std::vector<Root> &out) {
  const Vec2 e = seg.b() - seg.a();
  const double denom = cross(v, e);
  if (denom == 0.0) return;  // parallel, including sliding along the segment
  const Vec2 w = seg.a() - x0;
  const double t = cross(w, e) / denom;
  const double u = cross(w, v) / denom;
  if (t > 0.0 && t <= dur && u >= 0.0 && u <= 1.0) out.push_back({t, dot(v, seg.normal()) > 0.0});
}

/// Merges roots closer than tol and, when a defining function is available,
/// keeps only those with a sign change of rho across them.
void finalize_polyline_roots(std::vector<Root> &roots, const std::function<double(double)> &rho_along, double dur,
                             double tol, CrossingCount &out, double t0) {
  std::sort(roots.begin(), roots.end(), [](const Root &a, const Root &b) { return a.t < b.t; });
  std::vector<Root> merged;
  for (const auto &r : roots) {
    if (!merged.empty() && r.t - merged.back().t <= tol) continue;
    merged.push_back(r);
  }
  for (std::size_t k = 0; k < merged.size(); ++k) {
    const double t = merged[k].t;
    bool upward = merged[k].upward;
    if (rho_along) {
      const double lo = k == 0 ? 0.0 : merged[k - 1].t;
      const double hi = k + 1 < merged.size() ? merged[k + 1].t : (dur > t ? dur : t + 10.0 * tol);
      const double before = rho_along(0.5 * (lo + t));
      const double after = rho_along(0.5 * (t + hi));
      if (!(before * after < 0.0)) continue;
      upward = after > 0.0;
    }
    ++out.total;
    (upward ? out.upward : out.downward)++;
    out.times.push_back(t0 + t);
  }
}

/// Sign sampling on a subgrid followed by bisection. Runs of two or more
/// exactly-zero samples (sliding along the surface) are not crossings.
void generic_roots(const std::function<double(double)> &rho, const std::function<bool(double)> &accept,
                   const std::function<double(double)> &normal_speed, double dur, const ExactCountOptions &opts,
                   CrossingCount &out, double t0) {
  const int m = std::max(2, opts.subgrid);
  double last_t = 0.0;
  double last_v = rho(0.0);
  int zero_run = 0;
  bool have_sign = last_v != 0.0;
  for (int k = 1; k < m; ++k) {
    const double t = dur * k / (m - 1);
    const double v = rho(t);
    if (v == 0.0) {
      ++zero_run;
      continue;
    }
    if (have_sign && last_v * v < 0.0 && zero_run < 2) {
      double lo = last_t, hi = t, flo = last_v;
      while (hi - lo > opts.root_tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = rho(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      if (root > 0.0 && accept(root)) {
        ++out.total;
        (v > 0.0 ? out.upward : out.downward)++;
        out.times.push_back(t0 + root);
        if (std::abs(normal_speed(root)) < opts.tangency_tol) ++out.tangency_warnings;
      }
    }
    last_t = t;
    last_v = v;
    have_sign = true;
    zero_run = 0;
  }
}

} // namespace

CrossingCount count_exact(const EventTrajectory &traj, const Surface &surface, const ExactCountOptions &opts) {
  const ProcessModel &model = *traj.model;
  if (surface_dim(surface) != model.dim) throw UsageError("surface dimension does not match the process");
  CrossingCount count;
  for (std::size_t i = 0; i < traj.events.size(); ++i) {
    const Event &e = traj.events[i];
    if (i > 0) check_jump_off_surface(surface, e.x, e.time, opts);
    const double dur = traj.arc_end(i) - e.time;
    if (!(dur > 0.0)) continue;
    const Flow &flow = model.flow(e.mode);
    const Vec2 x0 = e.x;

    if (const auto &cv = flow.constant_velocity()) {
      const Vec2 v = *cv;
      if (const auto *l = std::get_if<Level>(&surface)) {
        if (v.x == 0.0) continue;
        const double t = (l->x_star - x0.x) / v.x;
        if (t > 0.0 && t <= dur) {
          ++count.total;
          (v.x > 0.0 ? count.upward : count.downward)++;
          count.times.push_back(e.time + t);
        }
        continue;
      }
      std::vector<Root> roots;
      std::function<double(double)> rho_along;
      if (const auto *g = std::get_if<Segment>(&surface)) {
        segment_roots_linear(*g, x0, v, dur, roots);
      } else {
        const auto &p = std::get<PolylineSurface>(surface);
        for (const auto &seg : p.segments) segment_roots_linear(seg, x0, v, dur, roots);
        if (p.defining_fn) rho_along = [&](double t) { return p.defining_fn(x0 + t * v); };
      }
      finalize_polyline_roots(roots, rho_along, dur, opts.root_tol, count, e.time);
      continue;
    }

    const auto point = [&](double t) { return flow(x0, t); };
    if (const auto *l = std::get_if<Level>(&surface)) {
      generic_roots([&](double t) { return point(t).x - l->x_star; }, [](double) { return true; },
                    [&](double t) { return flow.velocity(point(t)).x; }, dur, opts, count, e.time);
    } else if (const auto *g = std::get_if<Segment>(&surface)) {
      generic_roots([&](double t) { return g->side(point(t)); },
                    [&](double t) {
                      const double u = g->parameter(point(t));
                      return u >= 0.0 && u <= 1.0;
                    },
                    [&](double t) { return dot(flow.velocity(point(t)), g->normal()); }, dur, opts, count, e.time);
    } else {
      const auto &p = std::get<PolylineSurface>(surface);
      if (!p.defining_fn) throw UsageError("exact counting along curved flows needs a defining function");
      generic_roots([&](double t) { return p.defining_fn(point(t)); }, [](double) { return true; },
                    [&](double t) {
                      const Vec2 x = point(t);
                      try {
                        return dot(flow.velocity(x), normal_at(surface, x));
                      } catch (const UsageError &) {
                        return 1.0;  // corner or off-surface root: no normal to test
                      }
                    },
                    dur, opts, count, e.time);
    }
  }
  return count;
}

double kac_numeric(const std::function<double(double)> &f, const std::function<double(double)> &fprime,
                   double horizon, double level, double delta, double time_step) {
  if (!(delta > 0.0) || !(time_step > 0.0) || !(horizon > 0.0)) {
    throw UsageError("kac_numeric needs positive delta, time step and horizon");
  }
  const auto steps = static_cast<long>(std::ceil(horizon / time_step - 1e-9));
  const double h = horizon / static_cast<double>(steps);
  const double lo = level - delta;
  const double hi = level + delta;
  double total = 0.0;
  double t0 = 0.0;
  double f0 = f(t0);
  double g0 = std::abs(fprime(t0));
  for (long k = 1; k <= steps; ++k) {
    const double t1 = k == steps ? horizon : h * static_cast<double>(k);
    const double f1 = f(t1);
    const double g1 = std::abs(fprime(t1));
    // Fraction of the step where the linear interpolant stays in the window.
    double frac;
    if (f1 == f0) {
      frac = (f0 >= lo && f0 <= hi) ? 1.0 : 0.0;
    } else {
      const double s0 = (lo - f0) / (f1 - f0);
      const double s1 = (hi - f0) / (f1 - f0);
      const double a = std::max(0.0, std::min(s0, s1));
      const double b = std::min(1.0, std::max(s0, s1));
      frac = b > a ? b - a : 0.0;
    }
    total += frac * 0.5 * (g0 + g1) * (t1 - t0);
    t0 = t1;
    f0 = f1;
    g0 = g1;
  }
  return total / (2.0 * delta);
}

LocalTimeEstimate local_time(const GridTrajectory &traj, const Surface &surface, double delta,
                             std::optional<int> mode) {
  if (!(delta > 0.0)) throw UsageError("local time window must be positive");
  if (mode && traj.modes.size() != traj.samples.size()) {
    throw DataError("mode-restricted local time needs recorded modes");
  }
  long inside = 0;
  for (std::size_t j = 0; j + 1 < traj.samples.size(); ++j) {
    if (mode && traj.modes[j] != *mode) continue;
    if (tube_indicator(surface, traj.samples[j], delta)) ++inside;
  }
  return {delta, traj.step() * static_cast<double>(inside) / (2.0 * delta)};
}

} // namespace psp
