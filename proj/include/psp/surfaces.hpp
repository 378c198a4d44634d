#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "psp/geometry.hpp"

namespace psp {

/// One-dimensional crossing level; its normal is the scalar 1.
struct Level {
  double x_star = 0.0;
};

/// Oriented segment [A, B] with normal rot90(B - A) / |B - A|.
class Segment {
public:
  Segment(Vec2 a, Vec2 b);

  Vec2 a() const { return a_; }
  Vec2 b() const { return b_; }
  Vec2 normal() const { return nu_; }
  double length() const { return length_; }
  /// Signed distance to the supporting line, positive on the normal side.
  double side(Vec2 x) const { return dot(nu_, x - a_); }
  /// Projection parameter of x onto [A, B] (0 at A, 1 at B), unclamped.
  double parameter(Vec2 x) const { return dot(x - a_, b_ - a_) / (length_ * length_); }
  Vec2 at(double u) const { return a_ + u * (b_ - a_); }
  double distance(Vec2 x) const;

private:
  Vec2 a_, b_, nu_;
  double length_ = 0.0;
};

/// Piecewise-linear hypersurface. Closed surfaces carry a defining function,
/// negative inside and positive outside, and their segments are oriented so
/// every normal points outward.
struct PolylineSurface {
  std::vector<Segment> segments;
  std::function<double(Vec2)> defining_fn;
  std::string name;
};

/// Square with vertices (+-c, +-c), stored as four clockwise-ordered edges
/// (outward normals), with defining function max(|x1|, |x2|) - c.
PolylineSurface make_square(double c);

using Surface = std::variant<Level, Segment, PolylineSurface>;

int surface_dim(const Surface &s);
std::string describe(const Surface &s);

/// Quadrature node on a surface: point, weight (surface measure) and unit
/// normal. A level yields one node of weight 1 and normal 1.
struct SurfaceNode {
  Vec2 point;
  double weight = 1.0;
  Vec2 normal{1.0, 0.0};
};

/// Composite midpoint nodes with at most `step` spacing along every segment.
std::vector<SurfaceNode> quadrature_nodes(const Surface &s, double step);

/// Integral of f against the surface measure (counting measure for a level).
double surface_integral(const Surface &s, const std::function<double(Vec2)> &f, double step);

/// Outward unit normal at a surface point; throws at polyline vertices and
/// for points off the surface.
Vec2 normal_at(const Surface &s, Vec2 x);

/// Closed delta-tube membership: dist(x, S) <= delta.
bool tube_indicator(const Surface &s, Vec2 x, double delta);

/// Exact Euclidean distance to the surface.
double distance_to(const Surface &s, Vec2 x);

} // namespace psp
