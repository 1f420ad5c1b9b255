#pragma once

#include <cmath>

namespace cellplan {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm_sq() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Rotates v by angle (radians, counter-clockwise).
inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

double point_segment_distance(const Vec2& p, const Segment& s);

// Exact minimum Euclidean distance between two segments. Total on all
// inputs, degenerate (zero-length) segments included.
double segment_distance(const Segment& s1, const Segment& s2);

}  // namespace cellplan
