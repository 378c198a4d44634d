#include "psp/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "psp/errors.hpp"

namespace psp {

Segment::Segment(Vec2 a, Vec2 b) : a_(a), b_(b) {
  length_ = norm(b - a);
  if (!(length_ > 0.0)) throw UsageError("segment endpoints must differ");
  nu_ = (1.0 / length_) * rot90(b - a);
}

double Segment::distance(Vec2 x) const {
  const double u = std::clamp(parameter(x), 0.0, 1.0);
  const Vec2 d = x - at(u);
  return std::sqrt(dot(d, d));
}

PolylineSurface make_square(double c) {
  if (!(c > 0.0)) throw UsageError("square half-width must be positive");
  PolylineSurface s;
  const Vec2 sw{-c, -c}, nw{-c, c}, ne{c, c}, se{c, -c};
  s.segments = {Segment(sw, nw), Segment(nw, ne), Segment(ne, se), Segment(se, sw)};
  s.defining_fn = [c](Vec2 x) { return std::max(std::abs(x.x), std::abs(x.y)) - c; };
  std::ostringstream os;
  os << "square(c=" << c << ")";
  s.name = os.str();
  return s;
}

int surface_dim(const Surface &s) { return std::holds_alternative<Level>(s) ? 1 : 2; }

std::string describe(const Surface &s) {
  std::ostringstream os;
  if (const auto *l = std::get_if<Level>(&s)) {
    os << "level(" << l->x_star << ")";
  } else if (const auto *g = std::get_if<Segment>(&s)) {
    os << "segment((" << g->a().x << "," << g->a().y << ")->(" << g->b().x << "," << g->b().y << "))";
  } else {
    const auto &p = std::get<PolylineSurface>(s);
    os << (p.name.empty() ? "polyline" : p.name);
  }
  return os.str();
}

namespace {

void append_segment_nodes(const Segment &seg, double step, std::vector<SurfaceNode> &out) {
  const double ratio = seg.length() / step;
  const auto m = std::max<long>(1, static_cast<long>(std::ceil(ratio - 1e-9)));
  const double w = seg.length() / static_cast<double>(m);
  for (long k = 0; k < m; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    out.push_back({seg.at(u), w, seg.normal()});
  }
}

const std::vector<Segment> &segments_of(const Surface &s, std::vector<Segment> &scratch) {
  if (const auto *g = std::get_if<Segment>(&s)) {
    scratch = {*g};
    return scratch;
  }
  return std::get<PolylineSurface>(s).segments;
}

} // namespace

std::vector<SurfaceNode> quadrature_nodes(const Surface &s, double step) {
  if (!(step > 0.0)) throw UsageError("quadrature step must be positive");
  std::vector<SurfaceNode> nodes;
  if (const auto *l = std::get_if<Level>(&s)) {
    nodes.push_back({{l->x_star, 0.0}, 1.0, {1.0, 0.0}});
    return nodes;
  }
  std::vector<Segment> scratch;
  for (const auto &seg : segments_of(s, scratch)) append_segment_nodes(seg, step, nodes);
  return nodes;
}

double surface_integral(const Surface &s, const std::function<double(Vec2)> &f, double step) {
  double total = 0.0;
  for (const auto &node : quadrature_nodes(s, step)) {
    const double v = f(node.point);
    if (std::isnan(v)) {
      std::ostringstream os;
      os << "integrand is NaN at quadrature point (" << node.point.x << ", " << node.point.y << ") on "
         << describe(s);
      throw NumericError(os.str());
    }
    total += node.weight * v;
  }
  return total;
}

Vec2 normal_at(const Surface &s, Vec2 x) {
  if (std::holds_alternative<Level>(s)) return {1.0, 0.0};
  constexpr double tol = 1e-9;
  if (const auto *g = std::get_if<Segment>(&s)) {
    if (g->distance(x) > tol * std::max(1.0, g->length())) throw UsageError("point is not on the segment");
    return g->normal();
  }
  const auto &p = std::get<PolylineSurface>(s);
  const Segment *hit = nullptr;
  for (const auto &seg : p.segments) {
    const double scale = std::max(1.0, seg.length());
    if (norm(x - seg.a()) <= tol * scale || norm(x - seg.b()) <= tol * scale) {
      throw UsageError("normal is undefined at a polyline vertex");
    }
    if (seg.distance(x) <= tol * scale) hit = &seg;
  }
  if (hit == nullptr) throw UsageError("point is not on the surface");
  return hit->normal();
}

double distance_to(const Surface &s, Vec2 x) {
  if (const auto *l = std::get_if<Level>(&s)) return std::abs(x.x - l->x_star);
  std::vector<Segment> scratch;
  double best = std::numeric_limits<double>::infinity();
  for (const auto &seg : segments_of(s, scratch)) best = std::min(best, seg.distance(x));
  return best;
}

bool tube_indicator(const Surface &s, Vec2 x, double delta) {
  if (!(delta > 0.0)) throw UsageError("tube width must be positive");
  if (const auto *l = std::get_if<Level>(&s)) return std::abs(x.x - l->x_star) <= delta;
  // Squared comparison keeps the closed boundary exact for axis-aligned offsets.
  std::vector<Segment> scratch;
  for (const auto &seg : segments_of(s, scratch)) {
    const double u = std::clamp(seg.parameter(x), 0.0, 1.0);
    const Vec2 d = x - seg.at(u);
    if (dot(d, d) <= delta * delta) return true;
  }
  return false;
}

} // namespace psp
