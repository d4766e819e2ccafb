#pragma once

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "dp/bev.hpp"
#include "dp/params.hpp"
#include "dp/scene.hpp"
#include "dp/tensor.hpp"

namespace dp {

inline constexpr int kMapSamplePoints = 10;

struct MlpParams {
  Tensor w1, b1, w2, b2;
};

inline MlpParams make_mlp(ParamRegistry& reg, const std::string& prefix, int in, int hidden,
                          int out) {
  MlpParams p;
  p.w1 = reg.create(prefix + ".w1", in, hidden);
  p.b1 = reg.create(prefix + ".b1", 1, hidden);
  p.w2 = reg.create(prefix + ".w2", hidden, out);
  p.b2 = reg.create(prefix + ".b2", 1, out);
  return p;
}

inline Tensor mlp_forward(const MlpParams& p, const Tensor& x) {
  return add_rowvec(matmul(dp::tanh(add_rowvec(matmul(x, p.w1), p.b1)), p.w2), p.b2);
}

// Per-cell learned affine map over grid channels followed by tanh.
struct BevEncoderParams {
  Tensor w;  // kBevChannels x d_bev
  Tensor b;  // 1 x d_bev
};

inline BevEncoderParams make_bev_encoder(ParamRegistry& reg, int d_bev) {
  return BevEncoderParams{reg.create("bev.w", kBevChannels, d_bev), reg.create("bev.b", 1, d_bev)};
}

inline Tensor grid_as_tensor(const BEVGrid& g) {
  Tensor x(g.h * g.w, kBevChannels);
  std::copy(g.data.begin(), g.data.end(), x.data());
  return x;
}

inline Tensor bev_encode(const BEVGrid& g, const BevEncoderParams& p) {
  return dp::tanh(add_rowvec(matmul(grid_as_tensor(g), p.w), p.b));
}

// Clamped bilinear sampling footprint of a point: four flattened cell rows
// with convex weights.
struct BilinearSample {
  std::array<int, 4> rows{};
  std::array<double, 4> weights{};
};

inline BilinearSample bilinear_at(int h, int w, double extent, const Vec2& p) {
  auto frac = [](double v, int n, double ext) {
    double f = (v + ext) / (2.0 * ext) * n - 0.5;
    return std::min(static_cast<double>(n - 1), std::max(0.0, f));
  };
  const double u = frac(p.x, w, extent);
  const double v = frac(p.y, h, extent);
  const int ix0 = std::min(w - 2 >= 0 ? w - 2 : 0, static_cast<int>(std::floor(u)));
  const int iy0 = std::min(h - 2 >= 0 ? h - 2 : 0, static_cast<int>(std::floor(v)));
  const double tx = u - ix0, ty = v - iy0;
  BilinearSample s;
  const int ix1 = std::min(w - 1, ix0 + 1), iy1 = std::min(h - 1, iy0 + 1);
  s.rows = {iy0 * w + ix0, iy0 * w + ix1, iy1 * w + ix0, iy1 * w + ix1};
  s.weights = {(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty};
  return s;
}

// ---------------------------------------------------------------------------
// Instance attribute rows. Inputs are normalized to O(1) so the token MLPs
// start in the responsive range of tanh.
// ---------------------------------------------------------------------------

inline constexpr int kAgentAttrDim = 10;
inline constexpr int kMapAttrDim = 3 + 2 * kMapSamplePoints;
inline constexpr int kEgoAttrDim = 10;  // command one-hot + zero padding

inline Tensor agent_attr_row(const AgentState& a, double extent) {
  Tensor x(1, kAgentAttrDim);
  double* v = x.data();
  v[0] = a.pos.x / extent;
  v[1] = a.pos.y / extent;
  v[2] = std::sin(a.heading);
  v[3] = std::cos(a.heading);
  v[4] = a.speed / 10.0;
  v[5] = a.length / 5.0;
  v[6] = a.width / 2.5;
  v[7 + static_cast<int>(a.cls)] = 1.0;
  return x;
}

inline Tensor map_attr_row(const MapPolyline& pl, double extent) {
  Tensor x(1, kMapAttrDim);
  double* v = x.data();
  v[static_cast<int>(pl.kind)] = 1.0;
  const auto pts = resample_polyline(pl.points, kMapSamplePoints);
  for (int i = 0; i < kMapSamplePoints; ++i) {
    v[3 + 2 * i] = pts[i].x / extent;
    v[3 + 2 * i + 1] = pts[i].y / extent;
  }
  return x;
}

inline Tensor ego_attr_row(Command c) {
  Tensor x(1, kEgoAttrDim);
  x.data()[static_cast<int>(c)] = 1.0;
  return x;
}

inline Vec2 map_reference_point(const MapPolyline& pl) {
  const auto pts = resample_polyline(pl.points, kMapSamplePoints);
  Vec2 mid;
  for (const auto& p : pts) mid = mid + p;
  return mid * (1.0 / kMapSamplePoints);
}

struct TokenizerParams {
  MlpParams agent, map, ego;
};

inline TokenizerParams make_tokenizer(ParamRegistry& reg, int d) {
  TokenizerParams tp;
  tp.agent = make_mlp(reg, "tok.agent", kAgentAttrDim, d, d);
  tp.map = make_mlp(reg, "tok.map", kMapAttrDim, d, d);
  tp.ego = make_mlp(reg, "tok.ego", kEgoAttrDim, d, d);
  return tp;
}

// Instance queries with validity masks. Masked rows are exactly zero.
struct TokenizedScene {
  Tensor ego;                     // 1 x d
  Tensor agents;                  // max_agents x d; undefined when max_agents == 0
  std::vector<bool> agents_mask;  // one flag per slot
  Tensor map;                     // max_polylines x d; undefined when max_polylines == 0
  std::vector<bool> map_mask;

  int valid_agents() const {
    int n = 0;
    for (bool m : agents_mask) n += m ? 1 : 0;
    return n;
  }
  int valid_map() const {
    int n = 0;
    for (bool m : map_mask) n += m ? 1 : 0;
    return n;
  }
};

namespace tok_detail {

// token = MLP(attributes) + bilinear sample of encoded BEV at the reference
// point. `feature_rows` maps a sample to the 1 x d feature combination.
template <typename SampleFn>
TokenizedScene build_tokens(const Scene& scene, const TokenizerParams& tp, int d, int h, int w,
                            double extent, int max_agents, int max_polylines,
                            SampleFn&& feature_rows) {
  TokenizedScene ts;
  const Tensor ego_feat = feature_rows(bilinear_at(h, w, extent, Vec2{0.0, 0.0}));
  ts.ego = add(mlp_forward(tp.ego, ego_attr_row(scene.command)), ego_feat);

  if (max_agents > 0) {
    std::vector<Tensor> rows;
    rows.reserve(static_cast<size_t>(max_agents));
    ts.agents_mask.assign(static_cast<size_t>(max_agents), false);
    for (int i = 0; i < max_agents; ++i) {
      if (i < static_cast<int>(scene.agents.size())) {
        const auto& a = scene.agents[i];
        ts.agents_mask[i] = true;
        rows.push_back(add(mlp_forward(tp.agent, agent_attr_row(a, extent)),
                           feature_rows(bilinear_at(h, w, extent, a.pos))));
      } else {
        rows.push_back(Tensor::zeros(1, d));
      }
    }
    ts.agents = concat_rows(rows);
  }

  if (max_polylines > 0) {
    std::vector<Tensor> rows;
    rows.reserve(static_cast<size_t>(max_polylines));
    ts.map_mask.assign(static_cast<size_t>(max_polylines), false);
    for (int i = 0; i < max_polylines; ++i) {
      if (i < static_cast<int>(scene.map.size())) {
        const auto& pl = scene.map[i];
        ts.map_mask[i] = true;
        rows.push_back(add(mlp_forward(tp.map, map_attr_row(pl, extent)),
                           feature_rows(bilinear_at(h, w, extent, map_reference_point(pl)))));
      } else {
        rows.push_back(Tensor::zeros(1, d));
      }
    }
    ts.map = concat_rows(rows);
  }
  return ts;
}

}  // namespace tok_detail

// Reference path: sample a fully encoded BEV feature map.
inline TokenizedScene instance_tokens(const Tensor& f_bev, const BEVGrid& grid, const Scene& scene,
                                      const TokenizerParams& tp, int max_agents,
                                      int max_polylines) {
  if (f_bev.rows() != grid.h * grid.w) throw ShapeError("instance_tokens: grid/features mismatch");
  const int d = f_bev.cols();
  return tok_detail::build_tokens(scene, tp, d, grid.h, grid.w, grid.extent, max_agents,
                                  max_polylines, [&](const BilinearSample& s) {
                                    return rows_weighted_sum(
                                        f_bev, {s.rows.begin(), s.rows.end()},
                                        {s.weights.begin(), s.weights.end()});
                                  });
}

// Training path: encode only the grid cells that instances actually sample.
// Bit-identical to bev_encode + instance_tokens because tanh(row * W + b) is
// computed per cell either way.
inline TokenizedScene tokenize_scene(const Scene& scene, const BEVGrid& grid,
                                     const BevEncoderParams& bp, const TokenizerParams& tp,
                                     int max_agents, int max_polylines) {
  std::vector<BilinearSample> samples;
  samples.push_back(bilinear_at(grid.h, grid.w, grid.extent, Vec2{0.0, 0.0}));
  for (int i = 0; i < std::min<int>(max_agents, static_cast<int>(scene.agents.size())); ++i)
    samples.push_back(bilinear_at(grid.h, grid.w, grid.extent, scene.agents[i].pos));
  for (int i = 0; i < std::min<int>(max_polylines, static_cast<int>(scene.map.size())); ++i)
    samples.push_back(bilinear_at(grid.h, grid.w, grid.extent, map_reference_point(scene.map[i])));

  std::unordered_map<int, int> local;
  std::vector<int> cells;
  for (const auto& s : samples)
    for (int r : s.rows)
      if (!local.count(r)) {
        local[r] = static_cast<int>(cells.size());
        cells.push_back(r);
      }

  Tensor xsub(static_cast<int>(cells.size()), kBevChannels);
  for (size_t i = 0; i < cells.size(); ++i)
    for (int c = 0; c < kBevChannels; ++c)
      xsub.at(static_cast<int>(i), c) = grid.data[static_cast<size_t>(cells[i]) * kBevChannels + c];
  const Tensor fsub = dp::tanh(add_rowvec(matmul(xsub, bp.w), bp.b));

  const int d = bp.w.cols();
  return tok_detail::build_tokens(scene, tp, d, grid.h, grid.w, grid.extent, max_agents,
                                  max_polylines, [&](const BilinearSample& s) {
                                    std::vector<int> rows(4);
                                    for (int i = 0; i < 4; ++i) rows[i] = local.at(s.rows[i]);
                                    return rows_weighted_sum(
                                        fsub, rows, {s.weights.begin(), s.weights.end()});
                                  });
}

}  // namespace dp
