#include "cellplan/geometry.hpp"

#include <algorithm>

namespace cellplan {

double point_segment_distance(const Vec2& p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len_sq = d.norm_sq();
  if (len_sq <= 0.0) return (p - s.a).norm();
  const double t = std::clamp((p - s.a).dot(d) / len_sq, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

// Closest-point computation between two segments, after Ericson,
// "Real-Time Collision Detection", 5.1.9.
double segment_distance(const Segment& s1, const Segment& s2) {
  const Vec2 d1 = s1.b - s1.a;
  const Vec2 d2 = s2.b - s2.a;
  const Vec2 r = s1.a - s2.a;
  const double a = d1.norm_sq();
  const double e = d2.norm_sq();
  const double f = d2.dot(r);

  if (a <= 0.0 && e <= 0.0) return r.norm();
  if (a <= 0.0) return point_segment_distance(s1.a, s2);
  if (e <= 0.0) return point_segment_distance(s2.a, s1);

  const double c = d1.dot(r);
  const double b = d1.dot(d2);
  const double denom = a * e - b * b;

  double s = 0.0;
  if (denom > 0.0) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
  double t = (b * s + f) / e;

  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }

  const Vec2 p1 = s1.a + s * d1;
  const Vec2 p2 = s2.a + t * d2;
  return (p1 - p2).norm();
}

}  // namespace cellplan
