#pragma once

#include <cmath>

namespace psp {

/// Point or vector in the state space. One-dimensional states use `x` only
/// and keep `y` at zero.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 &operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// det(a, b) = a.x * b.y - a.y * b.x
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Counterclockwise quarter turn.
constexpr Vec2 rot90(Vec2 a) { return {-a.y, a.x}; }

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline Vec2 rotate(Vec2 a, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

} // namespace psp
