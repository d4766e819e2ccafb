#pragma once

#include <vector>

#include "dp/params.hpp"
#include "dp/tensor.hpp"
#include "dp/vocab.hpp"

namespace dp {

// Single-layer, single-head autoregressive decoder over the description
// vocabulary, with causal self-attention over the prefix and cross-attention
// to the agent tokens. Residual connections wrap both attention blocks.
struct ItgParams {
  Tensor embed;  // kVocabSize x d
  Tensor pos;    // kMaxDescLen x d, learned positions
  Tensor self_wq, self_wk, self_wv;
  Tensor cross_wq, cross_wk, cross_wv;
  Tensor out;  // d x kVocabSize
};

inline ItgParams make_itg(ParamRegistry& reg, int d) {
  ItgParams p;
  p.embed = reg.create("itg.embed", kVocabSize, d);
  p.pos = reg.create("itg.pos", kMaxDescLen, d);
  p.self_wq = reg.create("itg.self.wq", d, d);
  p.self_wk = reg.create("itg.self.wk", d, d);
  p.self_wv = reg.create("itg.self.wv", d, d);
  p.cross_wq = reg.create("itg.cross.wq", d, d);
  p.cross_wk = reg.create("itg.cross.wk", d, d);
  p.cross_wv = reg.create("itg.cross.wv", d, d);
  p.out = reg.create("itg.out", d, kVocabSize);
  return p;
}

namespace itg_detail {

// Next-token logits for every position of `tokens` in one pass. Causal
// masking makes row i depend only on tokens[0..i] (and the conditioning), so
// it matches the per-prefix path bit for bit.
inline Tensor decoder_logits(const std::vector<int>& tokens, const Tensor& cond,
                             const std::vector<bool>* cond_mask, const ItgParams& p) {
  const int n = static_cast<int>(tokens.size());
  std::vector<Tensor> rows;
  rows.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    rows.push_back(add(slice_rows(p.embed, tokens[i], 1), slice_rows(p.pos, i, 1)));
  Tensor x = n == 1 ? rows[0] : concat_rows(rows);

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.cols()));
  Tensor logits = scale(matmul(matmul(x, p.self_wq), transpose(matmul(x, p.self_wk))), inv_sqrt_d);
  if (n > 1) {
    Tensor causal(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) causal.at(i, j) = kMaskLogit;
    logits = add(logits, causal);
  }
  x = add(x, matmul(softmax_rows(logits), matmul(x, p.self_wv)));

  bool has_cond = cond.defined();
  if (has_cond && cond_mask) {
    bool any = false;
    for (bool m : *cond_mask) any = any || m;
    has_cond = any;
  }
  if (has_cond) {
    x = add(x, scaled_dot_attention(matmul(x, p.cross_wq), matmul(cond, p.cross_wk),
                                    matmul(cond, p.cross_wv), cond_mask));
  }
  return matmul(x, p.out);
}

inline void check_prefix(const std::vector<int>& prefix) {
  if (prefix.empty() || prefix.size() > kMaxDescLen)
    throw DataError("step_logits: prefix length must be in [1, 24]");
  if (prefix.front() != tok::BOS) throw DataError("step_logits: prefix must start with BOS");
  for (int t : prefix)
    if (t < 0 || t >= kVocabSize) throw DataError("step_logits: token id out of range");
}

}  // namespace itg_detail

// Logits for the token following `prefix`, conditioned on agent tokens.
inline Tensor step_logits(const std::vector<int>& prefix, const Tensor& cond,
                          const std::vector<bool>* cond_mask, const ItgParams& p) {
  itg_detail::check_prefix(prefix);
  const Tensor all = itg_detail::decoder_logits(prefix, cond, cond_mask, p);
  return slice_rows(all, all.rows() - 1, 1);
}

// Teacher-forced negative log-likelihood, averaged over predicted positions.
inline Tensor itg_loss(const Description& desc, const Tensor& cond,
                       const std::vector<bool>* cond_mask, const ItgParams& p) {
  if (!description_valid(desc)) throw DataError("itg_loss: description violates grammar");
  const int n_pred = static_cast<int>(desc.size()) - 1;
  const std::vector<int> inputs(desc.begin(), desc.end() - 1);
  const Tensor logits = itg_detail::decoder_logits(inputs, cond, cond_mask, p);
  const Tensor logp = log_softmax_rows(logits);
  Tensor acc;
  for (int i = 0; i < n_pred; ++i) {
    const Tensor t = select(logp, i, desc[static_cast<size_t>(i) + 1]);
    acc = acc.defined() ? add(acc, t) : t;
  }
  return scale(acc, -1.0 / static_cast<double>(n_pred));
}

// Greedy decoding from BOS; ties resolve to the lowest token id. Terminates
// within kMaxDescLen + 1 tokens and always ends with EOS.
inline Description greedy_decode(const Tensor& cond, const std::vector<bool>* cond_mask,
                                 const ItgParams& p) {
  NoGradGuard ng;
  Description seq{tok::BOS};
  while (static_cast<int>(seq.size()) < kMaxDescLen) {
    const Tensor logits = step_logits(seq, cond, cond_mask, p);
    int best = 0;
    for (int j = 1; j < logits.cols(); ++j)
      if (logits.at(0, j) > logits.at(0, best)) best = j;
    seq.push_back(best);
    if (best == tok::EOS) break;
  }
  if (seq.back() != tok::EOS) seq.push_back(tok::EOS);
  return seq;
}

}  // namespace dp
