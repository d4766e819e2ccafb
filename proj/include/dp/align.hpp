#pragma once

#include <utility>
#include <vector>

#include "dp/common.hpp"
#include "dp/params.hpp"
#include "dp/tensor.hpp"
#include "dp/vocab.hpp"

namespace dp {

inline constexpr double kItmEps = 1e-6;

// Learned token embedding table, one row per vocabulary token.
inline Tensor make_lang_embedding(ParamRegistry& reg, int d) {
  return reg.create("lang.table", kVocabSize, d);
}

// Mean of the embeddings of all tokens strictly between BOS and EOS.
inline Tensor embed_description(const Description& desc, const Tensor& table) {
  if (desc.size() < 3 || desc.front() != tok::BOS || desc.back() != tok::EOS)
    throw DataError("embed_description: malformed description");
  std::vector<int> body(desc.begin() + 1, desc.end() - 1);
  if (body.empty()) throw DataError("empty description body");
  for (int t : body)
    if (t < 0 || t >= kVocabSize) throw DataError("embed_description: token id out of range");
  std::vector<double> w(body.size(), 1.0 / static_cast<double>(body.size()));
  return rows_weighted_sum(table, body, w);
}

// Strict cosine similarity; zero-norm inputs are a caller error.
inline Tensor cosine_similarity(const Tensor& w, const Tensor& v) {
  if (w.rows() != 1 || v.rows() != 1 || w.cols() != v.cols())
    throw ShapeError("cosine_similarity: expects matching 1 x d inputs");
  const Tensor nw = sum_all(mul(w, w));
  const Tensor nv = sum_all(mul(v, v));
  if (nw.value() == 0.0 || nv.value() == 0.0) throw std::runtime_error("degenerate similarity");
  const Tensor dot = sum_all(mul(w, v));
  return mul(mul(dot, pow_const(nw, -0.5)), pow_const(nv, -0.5));
}

struct LabeledPair {
  Tensor scene_feat;  // w, 1 x d
  Tensor lang_feat;   // v, 1 x d
  int label = 1;      // 1 matched, 0 mismatched
};
using PairBatch = std::vector<LabeledPair>;

namespace align_detail {

// Similarity used inside the matching loss. A pair where either side has zero
// norm gets similarity exactly 0 with no gradient, so an all-zero model sits
// at the chance-level loss instead of erroring out.
inline Tensor pair_similarity(const Tensor& w, const Tensor& v) {
  double nw = 0.0, nv = 0.0;
  for (size_t i = 0; i < w.size(); ++i) nw += w.data()[i] * w.data()[i];
  for (size_t i = 0; i < v.size(); ++i) nv += v.data()[i] * v.data()[i];
  if (nw == 0.0 || nv == 0.0) return Tensor::zeros(1, 1);
  return cosine_similarity(w, v);
}

}  // namespace align_detail

// Binary matching loss over (scene, language) pairs. Cosine similarity is
// rescaled from [-1, 1] to (0, 1) via s_hat = clamp((s + 1) / 2, eps, 1 - eps)
// before the log terms.
inline Tensor itm_loss(const PairBatch& batch) {
  if (batch.empty()) throw ShapeError("itm_loss: empty batch");
  Tensor acc;
  for (const auto& pair : batch) {
    const Tensor s = align_detail::pair_similarity(pair.scene_feat, pair.lang_feat);
    const Tensor s_hat = clamp(scale(add_const(s, 1.0), 0.5), kItmEps, 1.0 - kItmEps);
    const Tensor term =
        pair.label ? neg(dp::log(s_hat)) : neg(dp::log(add_const(neg(s_hat), 1.0)));
    acc = acc.defined() ? add(acc, term) : term;
  }
  return scale(acc, 1.0 / static_cast<double>(batch.size()));
}

// Seeded permutation of 0..n-1 with no fixed point.
inline std::vector<size_t> seeded_derangement(size_t n, uint64_t seed) {
  if (n < 2) throw ShapeError("seeded_derangement: need n >= 2");
  Rng rng(splitmix64(seed ^ 0x7c15d1e9a9b4f3c5ull));
  std::vector<size_t> sigma(n);
  for (size_t i = 0; i < n; ++i) sigma[i] = i;
  bool ok = false;
  for (int tries = 0; tries < 64 && !ok; ++tries) {
    rng.shuffle(sigma);
    ok = true;
    for (size_t i = 0; i < n; ++i)
      if (sigma[i] == i) {
        ok = false;
        break;
      }
  }
  if (!ok) {
    // rotation is always a derangement
    for (size_t i = 0; i < n; ++i) sigma[i] = (i + 1) % n;
  }
  return sigma;
}

// All positives with label 1 plus one shuffled negative per positive, built
// from a seeded derangement so no negative reuses its own language feature.
inline PairBatch make_negatives(const std::vector<std::pair<Tensor, Tensor>>& positives,
                                uint64_t seed) {
  const size_t n = positives.size();
  if (n < 2) throw ShapeError("make_negatives: need at least 2 positives");
  const std::vector<size_t> sigma = seeded_derangement(n, seed);
  PairBatch batch;
  batch.reserve(2 * n);
  for (const auto& [w, v] : positives) batch.push_back({w, v, 1});
  for (size_t i = 0; i < n; ++i)
    batch.push_back({positives[i].first, positives[sigma[i]].second, 0});
  return batch;
}

}  // namespace dp
