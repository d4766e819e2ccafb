#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "dp/common.hpp"

namespace dp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Oriented rectangle: center, heading of the long axis, full side lengths.
struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const {
    const double c = std::cos(heading), s = std::sin(heading);
    const double hl = 0.5 * length, hw = 0.5 * width;
    const Vec2 ax{c, s}, ay{-s, c};
    return {center + ax * hl + ay * hw, center + ax * hl - ay * hw,
            center - ax * hl - ay * hw, center - ax * hl + ay * hw};
  }
};

// Separating-axis test for two oriented rectangles. Closed-set convention:
// rectangles that merely touch count as intersecting.
inline bool rect_intersect(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Vec2 axes[4] = {
      {std::cos(a.heading), std::sin(a.heading)},
      {-std::sin(a.heading), std::cos(a.heading)},
      {std::cos(b.heading), std::sin(b.heading)},
      {-std::sin(b.heading), std::cos(b.heading)},
  };
  for (const Vec2& ax : axes) {
    double amin = ca[0].dot(ax), amax = amin;
    double bmin = cb[0].dot(ax), bmax = bmin;
    for (int i = 1; i < 4; ++i) {
      const double pa = ca[i].dot(ax);
      amin = std::min(amin, pa);
      amax = std::max(amax, pa);
      const double pb = cb[i].dot(ax);
      bmin = std::min(bmin, pb);
      bmax = std::max(bmax, pb);
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

inline bool point_in_rect(const Vec2& p, const OrientedRect& r) {
  const double c = std::cos(r.heading), s = std::sin(r.heading);
  const Vec2 d = p - r.center;
  const double u = d.x * c + d.y * s;
  const double v = -d.x * s + d.y * c;
  return std::abs(u) <= 0.5 * r.length && std::abs(v) <= 0.5 * r.width;
}

inline double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

// Resample a polyline to exactly n points, equidistant in arclength.
inline std::vector<Vec2> resample_polyline(const std::vector<Vec2>& pts, int n) {
  if (pts.size() < 2) throw ShapeError("resample_polyline: need at least 2 points");
  if (n < 2) throw ShapeError("resample_polyline: need at least 2 samples");
  const double total = polyline_length(pts);
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(n));
  if (total == 0.0) {
    out.assign(static_cast<size_t>(n), pts.front());
    return out;
  }
  size_t seg = 1;
  double seg_start = 0.0;
  double seg_len = distance(pts[0], pts[1]);
  for (int i = 0; i < n; ++i) {
    const double target = total * static_cast<double>(i) / (n - 1);
    while (seg + 1 < pts.size() && seg_start + seg_len < target) {
      seg_start += seg_len;
      ++seg;
      seg_len = distance(pts[seg - 1], pts[seg]);
    }
    const double t = seg_len > 0.0 ? std::min(1.0, std::max(0.0, (target - seg_start) / seg_len)) : 0.0;
    out.push_back(pts[seg - 1] + (pts[seg] - pts[seg - 1]) * t);
  }
  return out;
}

}  // namespace dp
