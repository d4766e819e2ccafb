#pragma once

#include <string>
#include <vector>

#include "dp/align.hpp"
#include "dp/bev.hpp"
#include "dp/config.hpp"
#include "dp/heads.hpp"
#include "dp/itg.hpp"
#include "dp/metrics.hpp"
#include "dp/params.hpp"
#include "dp/scene.hpp"
#include "dp/tokenizer.hpp"
#include "dp/topology.hpp"

namespace dp {

// The full scene -> plan model. Parameters start at zero; call init_params for
// the seeded random initialization used in training.
struct DriveModel {
  Config cfg;
  ParamRegistry reg;
  BevEncoderParams bev;
  TokenizerParams tok;
  TgmParams tgm;
  Tensor lang;  // description embedding table
  ItgParams itg;
  HeadParams heads;

  explicit DriveModel(const Config& config) : cfg(config) {
    cfg.validate();
    bev = make_bev_encoder(reg, cfg.d_bev);
    tok = make_tokenizer(reg, cfg.d);
    tgm = make_tgm(reg, cfg.d, cfg.tgm_layers);
    lang = make_lang_embedding(reg, cfg.d);
    itg = make_itg(reg, cfg.d);
    heads = make_heads(reg, cfg.d);
  }

  // Weight matrices get fan-in-scaled normals, embedding tables a fixed std,
  // biases stay zero. The topology module's residual branch outputs (value
  // projections and second feed-forward map) start near zero so the stack
  // opens as the identity and context mixes in only as training asks for it.
  void init_params(uint64_t seed) {
    Rng rng(splitmix64(seed ^ 0x1db3c591bd129f4bull));
    for (auto& [name, t] : reg.items()) {
      const bool is_bias = name.find(".b") != std::string::npos && t.rows() == 1;
      if (is_bias) continue;
      const bool tgm_branch_out = name.rfind("tgm.", 0) == 0 &&
                                  (name.find(".wv") != std::string::npos ||
                                   name.find(".ff.w2") != std::string::npos);
      double std_dev;
      if (name == "lang.table") std_dev = 0.01;  // small norm, fast reorientation
      else if (name == "itg.embed" || name == "itg.pos") std_dev = 0.1;
      else if (tgm_branch_out) std_dev = 0.01;
      else std_dev = 1.0 / std::sqrt(static_cast<double>(t.rows()));
      Tensor tt = t;
      for (size_t i = 0; i < tt.size(); ++i) tt.data()[i] = std_dev * rng.normal();
    }
  }

  BEVGrid raster(const Scene& scene) const {
    return rasterize(scene, cfg.bev_h, cfg.bev_w, cfg.gen.extent);
  }

  TokenizedScene encode(const Scene& scene) const {
    const BEVGrid grid = raster(scene);
    return tokenize_scene(scene, grid, bev, tok, cfg.gen.max_agents, cfg.gen.max_polylines);
  }

  struct Refined {
    Tensor ego;
    Tensor agents;
    std::vector<bool> agents_mask;
    Tensor map;
    std::vector<bool> map_mask;
  };

  // Topology refinement, or the identity bypass when tgm is disabled.
  Refined refine(const TokenizedScene& ts) const {
    Refined r;
    r.agents_mask = ts.agents_mask;
    r.map = ts.map;
    r.map_mask = ts.map_mask;
    if (!cfg.tgm_enabled) {
      r.ego = ts.ego;
      r.agents = ts.agents;
      return r;
    }
    const Tensor q = concat_queries(ts.ego, ts.agents);
    auto [ego, agents] = tgm_forward(q, concat_mask(ts.agents_mask), ts.map, ts.map_mask, tgm);
    r.ego = ego;
    r.agents = agents;
    return r;
  }

  Tensor plan_tensor(const Refined& r, Command command) const {
    return plan_head_tensor(r.ego, command, heads);
  }

  // Inference path: scene in, plan out. Never reads descriptions.
  PlanningResult plan_scene(const Scene& scene) const {
    NoGradGuard ng;
    const Refined r = refine(encode(scene));
    const PlanningResult plan = plan_head(r.ego, scene.command, heads);
    for (const auto& w : plan.waypoints)
      if (!is_finite(w.x) || !is_finite(w.y))
        throw NumericError("NaN detected in planned trajectory");
    return plan;
  }
};

// ---------------------------------------------------------------------------
// Checkpoints: the generic parameter record file plus meta records carrying
// the canonical config text (one byte per f64) and the training phase tag.
// ---------------------------------------------------------------------------

inline constexpr const char* kMetaConfigRecord = "__config";
inline constexpr const char* kMetaPhaseRecord = "__phase";

inline void save_checkpoint(const std::string& path, const DriveModel& model, int phase) {
  std::vector<std::pair<std::string, Tensor>> records;
  const std::string text = config_text(model.cfg);
  Tensor cfg_rec(1, static_cast<int>(text.size()));
  for (size_t i = 0; i < text.size(); ++i)
    cfg_rec.data()[i] = static_cast<double>(static_cast<unsigned char>(text[i]));
  records.emplace_back(kMetaConfigRecord, cfg_rec);
  records.emplace_back(kMetaPhaseRecord, Tensor::scalar(static_cast<double>(phase)));
  for (const auto& item : model.reg.items()) records.push_back(item);
  save_params(path, records);
}

struct LoadedCheckpoint {
  DriveModel model;
  int phase = 0;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  const auto records = load_params(path);
  std::string text;
  int phase = 0;
  for (const auto& [name, t] : records) {
    if (name == kMetaConfigRecord) {
      text.reserve(t.size());
      for (size_t i = 0; i < t.size(); ++i)
        text.push_back(static_cast<char>(static_cast<unsigned char>(t.data()[i])));
    } else if (name == kMetaPhaseRecord) {
      phase = static_cast<int>(t.value());
    }
  }
  if (text.empty()) throw DataError(path + ": checkpoint missing config record");
  LoadedCheckpoint out{DriveModel(parse_config_text(text)), phase};
  size_t restored = 0;
  for (const auto& [name, t] : records) {
    if (name == kMetaConfigRecord || name == kMetaPhaseRecord) continue;
    if (!out.model.reg.contains(name))
      throw DataError(path + ": unexpected parameter record " + name);
    Tensor dst = out.model.reg.find(name);
    if (dst.rows() != t.rows() || dst.cols() != t.cols())
      throw DataError(path + ": shape mismatch for " + name);
    std::copy(t.data(), t.data() + t.size(), dst.data());
    ++restored;
  }
  if (restored != out.model.reg.items().size())
    throw DataError(path + ": checkpoint is missing parameter records");
  return out;
}

}  // namespace dp
