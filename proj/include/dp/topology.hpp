#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dp/params.hpp"
#include "dp/tensor.hpp"

namespace dp {

// Ego-agents self-attention plus (ego, agents)-map cross-attention. The
// printed attention equations carry no residual or feed-forward terms; both
// are added here so a zero-initialized stack is the identity and training does
// not collapse. Map tokens serve as keys/values only and are never refined.

struct TgmLayerParams {
  Tensor self_wq, self_wk, self_wv;
  Tensor cross_wq, cross_wk, cross_wv;
  Tensor ff_w1, ff_b1, ff_w2, ff_b2;
};

struct TgmParams {
  std::vector<TgmLayerParams> layers;
};

inline TgmParams make_tgm(ParamRegistry& reg, int d, int n_layers) {
  TgmParams p;
  for (int l = 0; l < n_layers; ++l) {
    const std::string pre = "tgm.l" + std::to_string(l);
    TgmLayerParams lp;
    lp.self_wq = reg.create(pre + ".self.wq", d, d);
    lp.self_wk = reg.create(pre + ".self.wk", d, d);
    lp.self_wv = reg.create(pre + ".self.wv", d, d);
    lp.cross_wq = reg.create(pre + ".cross.wq", d, d);
    lp.cross_wk = reg.create(pre + ".cross.wk", d, d);
    lp.cross_wv = reg.create(pre + ".cross.wv", d, d);
    lp.ff_w1 = reg.create(pre + ".ff.w1", d, d);
    lp.ff_b1 = reg.create(pre + ".ff.b1", 1, d);
    lp.ff_w2 = reg.create(pre + ".ff.w2", d, d);
    lp.ff_b2 = reg.create(pre + ".ff.b2", 1, d);
    p.layers.push_back(lp);
  }
  return p;
}

// Row 0 is the ego query, rows 1..N_a the agent queries.
inline Tensor concat_queries(const Tensor& q_ego, const Tensor& q_agents) {
  if (q_ego.rows() != 1) throw ShapeError("concat_queries: ego query must be one row");
  if (!q_agents.defined()) return q_ego;
  if (q_agents.cols() != q_ego.cols()) throw ShapeError("concat_queries: dimension mismatch");
  return concat_rows({q_ego, q_agents});
}

// Validity mask for the concatenated queries; the ego row is always valid.
inline std::vector<bool> concat_mask(const std::vector<bool>& agents_mask) {
  std::vector<bool> m;
  m.reserve(agents_mask.size() + 1);
  m.push_back(true);
  m.insert(m.end(), agents_mask.begin(), agents_mask.end());
  return m;
}

// Refines the concatenated (ego, agents) queries and splits them back apart.
// Masked rows are forced to exactly zero on output.
inline std::pair<Tensor, Tensor> tgm_forward(const Tensor& q_concat, const std::vector<bool>& mask,
                                             const Tensor& q_map, const std::vector<bool>& map_mask,
                                             const TgmParams& params) {
  if (static_cast<int>(mask.size()) != q_concat.rows())
    throw ShapeError("tgm_forward: mask length mismatch");
  if (mask.empty() || !mask[0]) throw std::runtime_error("tgm_forward: ego row is masked");
  int valid_map = 0;
  if (q_map.defined()) {
    if (static_cast<int>(map_mask.size()) != q_map.rows())
      throw ShapeError("tgm_forward: map mask length mismatch");
    for (bool m : map_mask) valid_map += m ? 1 : 0;
  }

  Tensor x = q_concat;
  for (const auto& lp : params.layers) {
    x = add(x, scaled_dot_attention(matmul(x, lp.self_wq), matmul(x, lp.self_wk),
                                    matmul(x, lp.self_wv), &mask));
    if (valid_map > 0) {
      x = add(x, scaled_dot_attention(matmul(x, lp.cross_wq), matmul(q_map, lp.cross_wk),
                                      matmul(q_map, lp.cross_wv), &map_mask));
    }
    x = add(x, add_rowvec(matmul(dp::tanh(add_rowvec(matmul(x, lp.ff_w1), lp.ff_b1)), lp.ff_w2),
                          lp.ff_b2));
  }

  bool any_masked = false;
  for (bool m : mask) any_masked = any_masked || !m;
  if (any_masked) {
    Tensor keep(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
      if (mask[i])
        for (int j = 0; j < x.cols(); ++j) keep.at(i, j) = 1.0;
    x = mul(x, keep);
  }

  Tensor ego = slice_rows(x, 0, 1);
  Tensor agents;
  if (x.rows() > 1) agents = slice_rows(x, 1, x.rows() - 1);
  return {ego, agents};
}

}  // namespace dp
