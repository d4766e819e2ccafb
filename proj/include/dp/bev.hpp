#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dp/common.hpp"
#include "dp/geometry.hpp"
#include "dp/scene.hpp"

namespace dp {

inline constexpr int kBevChannels = 6;
// channel order: car, pedestrian, cyclist occupancy; lane_divider,
// road_boundary, ped_crossing strokes
inline int bev_channel(AgentClass c) { return static_cast<int>(c); }
inline int bev_channel(PolyKind k) { return 3 + static_cast<int>(k); }

// H x W x C occupancy grid over [-extent, extent]^2, all values in [0, 1].
// Cell (iy, ix) covers a square; flattened row index is iy * W + ix.
struct BEVGrid {
  int h = 0, w = 0;
  double extent = 0.0;
  std::vector<double> data;  // (h*w) x kBevChannels, row-major

  BEVGrid(int h_, int w_, double extent_) : h(h_), w(w_), extent(extent_) {
    if (h <= 0 || w <= 0 || extent <= 0.0) throw ShapeError("BEVGrid: invalid dims");
    data.assign(static_cast<size_t>(h) * w * kBevChannels, 0.0);
  }

  double cell_w() const { return 2.0 * extent / w; }
  double cell_h() const { return 2.0 * extent / h; }

  double& at(int iy, int ix, int c) {
    return data[(static_cast<size_t>(iy) * w + ix) * kBevChannels + c];
  }
  double at(int iy, int ix, int c) const {
    return data[(static_cast<size_t>(iy) * w + ix) * kBevChannels + c];
  }

  // continuous coords -> fractional cell index (cell centers at .5 offsets)
  double fx(double x) const { return (x + extent) / (2.0 * extent) * w - 0.5; }
  double fy(double y) const { return (y + extent) / (2.0 * extent) * h - 0.5; }
};

namespace bev_detail {

// Coverage fraction of one cell by an oriented rect, 6x6 subsamples.
inline double cell_coverage(const BEVGrid& g, int iy, int ix, const OrientedRect& rect) {
  const double x0 = -g.extent + ix * g.cell_w();
  const double y0 = -g.extent + iy * g.cell_h();
  int inside = 0;
  for (int sy = 0; sy < 6; ++sy)
    for (int sx = 0; sx < 6; ++sx) {
      const Vec2 p{x0 + (sx + 0.5) / 6.0 * g.cell_w(), y0 + (sy + 0.5) / 6.0 * g.cell_h()};
      if (point_in_rect(p, rect)) ++inside;
    }
  return inside / 36.0;
}

inline void paint_rect(BEVGrid& g, const OrientedRect& rect, int channel) {
  double rad = 0.5 * std::hypot(rect.length, rect.width);
  const int ix0 = std::max(0, static_cast<int>(std::floor(g.fx(rect.center.x - rad))));
  const int ix1 = std::min(g.w - 1, static_cast<int>(std::ceil(g.fx(rect.center.x + rad))) + 1);
  const int iy0 = std::max(0, static_cast<int>(std::floor(g.fy(rect.center.y - rad))));
  const int iy1 = std::min(g.h - 1, static_cast<int>(std::ceil(g.fy(rect.center.y + rad))) + 1);
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double cov = cell_coverage(g, iy, ix, rect);
      if (cov > 0.0) g.at(iy, ix, channel) = std::min(1.0, g.at(iy, ix, channel) + cov);
    }
}

inline void paint_polyline(BEVGrid& g, const MapPolyline& pl) {
  const int channel = bev_channel(pl.kind);
  const double step = 0.25 * std::min(g.cell_w(), g.cell_h());
  for (size_t i = 1; i < pl.points.size(); ++i) {
    const Vec2 a = pl.points[i - 1], b = pl.points[i];
    const double len = distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int s = 0; s <= n; ++s) {
      const Vec2 p = a + (b - a) * (static_cast<double>(s) / n);
      const int ix = static_cast<int>(std::floor((p.x + g.extent) / (2.0 * g.extent) * g.w));
      const int iy = static_cast<int>(std::floor((p.y + g.extent) / (2.0 * g.extent) * g.h));
      if (ix >= 0 && ix < g.w && iy >= 0 && iy < g.h) g.at(iy, ix, channel) = 1.0;
    }
  }
}

}  // namespace bev_detail

// Agents become coverage-weighted oriented rectangles in their class channel;
// map polylines become one-cell-wide strokes in their kind channel.
inline BEVGrid rasterize(const Scene& scene, int h, int w, double extent) {
  BEVGrid g(h, w, extent);
  for (const auto& a : scene.agents)
    bev_detail::paint_rect(g, OrientedRect{a.pos, a.heading, a.length, a.width},
                           bev_channel(a.cls));
  for (const auto& pl : scene.map) bev_detail::paint_polyline(g, pl);
  return g;
}

}  // namespace dp
