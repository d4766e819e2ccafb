#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "dp/align.hpp"
#include "dp/describer.hpp"
#include "dp/heads.hpp"
#include "dp/itg.hpp"
#include "dp/model.hpp"
#include "dp/optim.hpp"

namespace dp {

// Descriptions ride in the dataset; recompute through the rule describer when
// a record carries none. Both paths are deterministic functions of the scene.
inline Description scene_description(const Scene& scene, DescriptionMode mode) {
  const std::vector<int>& stored =
      mode == DescriptionMode::ald ? scene.ald_tokens : scene.gld_tokens;
  if (!stored.empty()) return stored;
  return mode == DescriptionMode::ald ? attention_description(scene) : global_description(scene);
}

struct StepLosses {
  double plan = 0.0, motion = 0.0, det = 0.0, map = 0.0, itm = 0.0, itg = 0.0;
  double total = 0.0;
};

namespace train_detail {

struct BatchLoss {
  Tensor total;
  StepLosses logged;
};

// Forward a batch of scenes and assemble the weighted loss. Phase 1 uses the
// alignment+generation terms only; phase 2 adds planning, motion and the
// auxiliary regressions.
inline BatchLoss batch_loss(const DriveModel& m, const std::vector<Scene>& scenes,
                            const std::vector<size_t>& batch, int phase, uint64_t pair_seed) {
  const Config& cfg = m.cfg;
  const bool use_lgam = cfg.lgam_enabled;
  const double w_itm = use_lgam ? cfg.w_itm : 0.0;
  const double w_itg = use_lgam ? cfg.w_itg : 0.0;

  Tensor plan_acc, motion_acc, det_acc, map_acc, itg_acc;
  std::vector<std::pair<Tensor, Tensor>> positives;
  std::vector<Description> pos_descs;
  auto accumulate = [](Tensor& acc, const Tensor& t) { acc = acc.defined() ? add(acc, t) : t; };

  for (size_t idx : batch) {
    const Scene& scene = scenes[idx];
    const TokenizedScene ts = m.encode(scene);
    const DriveModel::Refined r = m.refine(ts);

    if (phase == 2) {
      accumulate(plan_acc, imitation_loss(m.plan_tensor(r, scene.command),
                                          future_as_tensor(scene.ego_future)));
      const auto motions = motion_head(r.agents, r.agents_mask, m.heads);
      if (!motions.empty()) {
        Tensor ma;
        size_t pred = 0;
        for (size_t i = 0; i < r.agents_mask.size(); ++i) {
          if (!r.agents_mask[i]) continue;
          accumulate(ma, imitation_loss(motions[pred++],
                                        future_offsets_tensor(scene.agent_futures[i],
                                                              scene.agents[i].pos)));
        }
        accumulate(motion_acc, scale(ma, 1.0 / static_cast<double>(motions.size())));
      } else {
        accumulate(motion_acc, Tensor::zeros(1, 1));
      }
      auto [det, map] = aux_losses(r.agents, r.agents_mask, r.map, r.map_mask, scene, m.heads);
      accumulate(det_acc, det);
      accumulate(map_acc, map);
    }

    if (w_itm > 0.0 || w_itg > 0.0) {
      const Description desc = scene_description(scene, cfg.description_mode);
      if (w_itg > 0.0)
        accumulate(itg_acc, itg_loss(desc, r.agents, &r.agents_mask, m.itg));
      if (w_itm > 0.0) {
        positives.emplace_back(r.ego, embed_description(desc, m.lang));
        pos_descs.push_back(desc);
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  BatchLoss out;
  Tensor total;
  auto add_term = [&](Tensor term, double weight, double& slot) {
    term = scale(term, inv_n);
    slot = term.value();
    if (weight != 0.0) {
      const Tensor weighted = scale(term, weight);
      total = total.defined() ? add(total, weighted) : weighted;
    }
  };

  if (phase == 2) {
    add_term(plan_acc, cfg.w_plan, out.logged.plan);
    add_term(motion_acc, cfg.w_motion, out.logged.motion);
    add_term(det_acc, cfg.w_det, out.logged.det);
    add_term(map_acc, cfg.w_map, out.logged.map);
  }
  if (w_itm > 0.0) {
    // matched pairs plus deranged mismatches; a derangement slot that lands on
    // an identical description is a match in disguise and is skipped
    Tensor itm = Tensor::zeros(1, 1);
    if (positives.size() >= 2) {
      PairBatch pairs;
      for (const auto& [w, v] : positives) pairs.push_back({w, v, 1});
      const auto sigma = seeded_derangement(positives.size(), pair_seed);
      for (size_t i = 0; i < positives.size(); ++i)
        if (pos_descs[sigma[i]] != pos_descs[i])
          pairs.push_back({positives[i].first, positives[sigma[i]].second, 0});
      itm = itm_loss(pairs);
    }
    out.logged.itm = itm.value();
    const Tensor weighted = scale(itm, w_itm);
    total = total.defined() ? add(total, weighted) : weighted;
  }
  if (w_itg > 0.0) add_term(itg_acc, w_itg, out.logged.itg);

  if (!total.defined()) total = Tensor::zeros(1, 1);
  out.total = total;
  out.logged.total = total.value();
  return out;
}

inline void run_training(DriveModel& m, const std::vector<Scene>& train, int phase, int epochs,
                         const std::vector<std::pair<std::string, Tensor>>& opt_params,
                         bool verbose) {
  if (train.empty()) throw DataError("training requires at least one scene");
  const Config& cfg = m.cfg;
  const size_t n = train.size();
  const size_t bs = static_cast<size_t>(cfg.batch_size);
  const size_t batches_per_epoch = (n + bs - 1) / bs;
  const int total_steps = static_cast<int>(batches_per_epoch) * epochs;

  AdamW opt(opt_params, cfg.weight_decay);
  Rng shuffle_rng(splitmix64(cfg.seed ^ (phase == 1 ? 0x9d2c5681f84a7b31ull : 0x4b1d92e8c6a35f07ull)));
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  int step = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    StepLosses last{};
    for (size_t b = 0; b < batches_per_epoch; ++b) {
      Tape::get().clear();
      m.reg.zero_grad();
      std::vector<size_t> batch(order.begin() + static_cast<long>(b * bs),
                                order.begin() + static_cast<long>(std::min(n, (b + 1) * bs)));
      const uint64_t pair_seed = splitmix64(cfg.seed ^ (static_cast<uint64_t>(step) * 0x9e3779b9ull) ^
                                            (phase == 1 ? 0x1111ull : 0x2222ull));
      BatchLoss loss = batch_loss(m, train, batch, phase, pair_seed);
      if (!is_finite(loss.logged.total))
        throw NumericError("NaN detected in training loss at step " + std::to_string(step));
      backward(loss.total);
      opt.step(cosine_lr(step, total_steps, cfg.lr));
      ++step;
      last = loss.logged;
    }
    if (verbose && (epoch % 10 == 9 || epoch == 0 || epoch == epochs - 1)) {
      std::printf("phase%d epoch %d/%d loss %.6f (plan %.4f motion %.4f det %.4f map %.4f "
                  "itm %.4f itg %.4f)\n",
                  phase, epoch + 1, epochs, last.total, last.plan, last.motion, last.det, last.map,
                  last.itm, last.itg);
      std::fflush(stdout);
    }
  }
}

}  // namespace train_detail

inline constexpr const char* kPhase1Prefixes[] = {"bev.", "tok.", "tgm.", "lang.", "itg."};

// Phase 1: vision-language pre-training. Optimizes the full representation
// path (tokenizer, topology, language table, generation head) under the
// alignment losses; the task heads stay frozen and unused.
inline DriveModel train_phase1(const std::vector<Scene>& train, const Config& cfg,
                               bool verbose = false) {
  if (!cfg.lgam_enabled) throw ConfigError("phase 1 requires LGAM");
  DriveModel m(cfg);
  m.init_params(cfg.seed);
  const std::vector<std::string> prefixes(std::begin(kPhase1Prefixes), std::end(kPhase1Prefixes));
  train_detail::run_training(m, train, 1, cfg.epochs_phase1, m.reg.items_with_prefix(prefixes),
                             verbose);
  return m;
}

// Phase 2: end-to-end training over all parameters, optionally starting from
// a phase-1 model. Only the vision-language alignment module's weights carry
// over (encoder, tokenizer, language table, generation head); the topology
// module restarts from its seeded near-identity init and is learned
// end-to-end here. Descriptions feed the losses only; the scene -> plan path
// never consumes one.
inline DriveModel train_phase2(const std::vector<Scene>& train, const Config& cfg,
                               const DriveModel* init = nullptr, bool verbose = false) {
  DriveModel m(cfg);
  m.init_params(cfg.seed);
  if (init) {
    if (config_hash(init->cfg) != config_hash(cfg)) {
      // tolerate flag-only differences; dims must agree
      if (init->cfg.d != cfg.d || init->cfg.bev_h != cfg.bev_h || init->cfg.bev_w != cfg.bev_w ||
          init->cfg.d_bev != cfg.d_bev || init->cfg.tgm_layers != cfg.tgm_layers)
        throw ConfigError("init checkpoint dims do not match config");
    }
    for (const auto& [name, t] : init->reg.items()) {
      if (name.rfind("tgm.", 0) == 0 || name.rfind("head.", 0) == 0) continue;
      Tensor dst = m.reg.find(name);
      std::copy(t.data(), t.data() + t.size(), dst.data());
    }
  }
  train_detail::run_training(m, train, 2, cfg.epochs_phase2, m.reg.items(), verbose);
  return m;
}

// Inference + metrics over a scene set. Checks the dataset fits the model's
// slot dimensions first.
inline MetricsReport evaluate_run(const DriveModel& model, const std::vector<Scene>& scenes,
                                  MetricMode mode) {
  if (scenes.empty()) throw DataError("evaluation requires at least one scene");
  for (const auto& s : scenes) {
    if (static_cast<int>(s.agents.size()) > model.cfg.gen.max_agents ||
        static_cast<int>(s.map.size()) > model.cfg.gen.max_polylines)
      throw ConfigError("checkpoint/dataset dimension mismatch");
    if (s.ego_future.size() != kFutureSteps)
      throw DataError("scene ground truth must have 6 waypoints");
  }
  std::vector<PlanningResult> plans;
  plans.reserve(scenes.size());
  for (const auto& s : scenes) plans.push_back(model.plan_scene(s));
  return evaluate_plans(plans, scenes, model.cfg.gen.ego_length, model.cfg.gen.ego_width, mode);
}

// Mean matched minus mean mismatched cosine similarity on held-out scenes.
inline double alignment_margin(const DriveModel& model, const std::vector<Scene>& scenes,
                               uint64_t seed) {
  if (scenes.size() < 2) throw DataError("alignment margin needs at least 2 scenes");
  NoGradGuard ng;
  std::vector<Tensor> ws, vs;
  for (const auto& scene : scenes) {
    const DriveModel::Refined r = model.refine(model.encode(scene));
    ws.push_back(r.ego);
    vs.push_back(embed_description(scene_description(scene, model.cfg.description_mode),
                                   model.lang));
  }
  Rng rng(splitmix64(seed ^ 0x77aa11ddee33cc55ull));
  std::vector<size_t> sigma(scenes.size());
  for (size_t i = 0; i < sigma.size(); ++i) sigma[i] = i;
  bool ok = false;
  for (int tries = 0; tries < 64 && !ok; ++tries) {
    rng.shuffle(sigma);
    ok = true;
    for (size_t i = 0; i < sigma.size(); ++i)
      if (sigma[i] == i) { ok = false; break; }
  }
  if (!ok)
    for (size_t i = 0; i < sigma.size(); ++i) sigma[i] = (i + 1) % sigma.size();
  double matched = 0.0, mismatched = 0.0;
  for (size_t i = 0; i < ws.size(); ++i) {
    matched += align_detail::pair_similarity(ws[i], vs[i]).value();
    mismatched += align_detail::pair_similarity(ws[i], vs[sigma[i]]).value();
  }
  return (matched - mismatched) / static_cast<double>(ws.size());
}

inline std::pair<std::vector<Scene>, std::vector<Scene>> split_dataset(
    const std::vector<Scene>& scenes, int train_count) {
  const size_t cut = std::min<size_t>(scenes.size(), static_cast<size_t>(train_count));
  return {std::vector<Scene>(scenes.begin(), scenes.begin() + static_cast<long>(cut)),
          std::vector<Scene>(scenes.begin() + static_cast<long>(cut), scenes.end())};
}

struct AblateRow {
  bool tgm = false;
  bool lgam = false;
  MetricsReport report;
};

// Trains and evaluates the four {TGM, LGAM} on/off configurations under one
// seed. LGAM-on rows follow the two-phase recipe.
inline std::vector<AblateRow> ablate(const Config& cfg, const std::vector<Scene>& scenes,
                                     bool verbose = false) {
  auto [train, val] = split_dataset(scenes, cfg.train_count);
  if (train.empty() || val.empty())
    throw ConfigError("ablate needs both training and held-out scenes (data.train_count)");
  const bool flag_grid[4][2] = {{false, false}, {true, false}, {false, true}, {true, true}};
  std::vector<AblateRow> rows;
  for (const auto& flags : flag_grid) {
    Config c = cfg;
    c.tgm_enabled = flags[0];
    c.lgam_enabled = flags[1];
    DriveModel model = [&] {
      if (c.lgam_enabled) {
        const DriveModel pre = train_phase1(train, c, verbose);
        return train_phase2(train, c, &pre, verbose);
      }
      return train_phase2(train, c, nullptr, verbose);
    }();
    AblateRow row;
    row.tgm = flags[0];
    row.lgam = flags[1];
    row.report = evaluate_run(model, val, cfg.metric_mode);
    rows.push_back(row);
    if (verbose) {
      std::printf("ablate tgm=%d lgam=%d l2_avg %.4f cr_avg %.4f\n", row.tgm ? 1 : 0,
                  row.lgam ? 1 : 0, row.report.l2_avg, row.report.cr_avg);
      std::fflush(stdout);
    }
  }
  return rows;
}

inline constexpr const char* kAblateCsvHeader =
    "tgm,lgam,l2_1s,l2_2s,l2_3s,l2_avg,cr_1s,cr_2s,cr_3s,cr_avg";

inline std::string ablate_csv_row(const AblateRow& r) {
  std::string row = std::string(r.tgm ? "1" : "0") + "," + (r.lgam ? "1" : "0");
  for (int h = 0; h < 3; ++h) row += "," + fmt_fixed(r.report.l2[h], 6);
  row += "," + fmt_fixed(r.report.l2_avg, 6);
  for (int h = 0; h < 3; ++h) row += "," + fmt_fixed(r.report.cr[h], 6);
  row += "," + fmt_fixed(r.report.cr_avg, 6);
  return row;
}

// Table-3-style pair: global vs attention description supervision, both with
// the full model.
inline std::pair<AblateRow, AblateRow> ablate_description_modes(const Config& cfg,
                                                                const std::vector<Scene>& scenes,
                                                                bool verbose = false) {
  auto [train, val] = split_dataset(scenes, cfg.train_count);
  if (train.empty() || val.empty())
    throw ConfigError("description ablation needs training and held-out scenes");
  auto run = [&](DescriptionMode mode) {
    Config c = cfg;
    c.tgm_enabled = true;
    c.lgam_enabled = true;
    c.description_mode = mode;
    const DriveModel pre = train_phase1(train, c, verbose);
    const DriveModel model = train_phase2(train, c, &pre, verbose);
    AblateRow row;
    row.tgm = true;
    row.lgam = true;
    row.report = evaluate_run(model, val, cfg.metric_mode);
    return row;
  };
  return {run(DescriptionMode::gld), run(DescriptionMode::ald)};
}

}  // namespace dp
