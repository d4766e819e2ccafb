#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "dp/metrics.hpp"
#include "dp/params.hpp"
#include "dp/scene.hpp"
#include "dp/tensor.hpp"
#include "dp/tokenizer.hpp"

namespace dp {

// Decoders from refined tokens: planning MLP with a command input, plus
// single-mode motion prediction and the auxiliary detection/map regressors.
// Raw head outputs are multiplied by fixed gains so that meter-scale targets
// sit within reach of unit-scale weights.
inline constexpr double kPlanGain = 30.0;
inline constexpr double kMotionGain = 30.0;
inline constexpr double kDetGain = 50.0;
inline constexpr double kMapGain = 50.0;

struct HeadParams {
  Tensor plan_w_tok;  // d x d
  Tensor plan_w_cmd;  // 3 x d
  Tensor plan_b1;     // 1 x d
  Tensor plan_w2;     // d x 12
  Tensor plan_b2;     // 1 x 12
  Tensor motion_w;    // d x 12
  Tensor motion_b;
  Tensor det_w;  // d x 6: x, y, sin, cos, speed, log-area
  Tensor det_b;
  Tensor map_w;  // d x 20: 10 resampled points
  Tensor map_b;
};

inline HeadParams make_heads(ParamRegistry& reg, int d) {
  HeadParams p;
  p.plan_w_tok = reg.create("head.plan.w_tok", d, d);
  p.plan_w_cmd = reg.create("head.plan.w_cmd", 3, d);
  p.plan_b1 = reg.create("head.plan.b1", 1, d);
  p.plan_w2 = reg.create("head.plan.w2", d, 2 * kFutureSteps);
  p.plan_b2 = reg.create("head.plan.b2", 1, 2 * kFutureSteps);
  p.motion_w = reg.create("head.motion.w", d, 2 * kFutureSteps);
  p.motion_b = reg.create("head.motion.b", 1, 2 * kFutureSteps);
  p.det_w = reg.create("head.det.w", d, 6);
  p.det_b = reg.create("head.det.b", 1, 6);
  p.map_w = reg.create("head.map.w", d, 2 * kMapSamplePoints);
  p.map_b = reg.create("head.map.b", 1, 2 * kMapSamplePoints);
  return p;
}

inline Tensor command_onehot(Command c) {
  Tensor x(1, 3);
  x.data()[static_cast<int>(c)] = 1.0;
  return x;
}

// Planned trajectory as a differentiable 6 x 2 tensor.
inline Tensor plan_head_tensor(const Tensor& q_ego_refined, Command command,
                               const HeadParams& p) {
  const Tensor pre = add_rowvec(
      add(matmul(q_ego_refined, p.plan_w_tok), matmul(command_onehot(command), p.plan_w_cmd)),
      p.plan_b1);
  const Tensor out = add_rowvec(matmul(dp::tanh(pre), p.plan_w2), p.plan_b2);
  return reshape(scale(out, kPlanGain), kFutureSteps, 2);
}

inline PlanningResult plan_head(const Tensor& q_ego_refined, Command command,
                                const HeadParams& p) {
  const Tensor t = plan_head_tensor(q_ego_refined, command, p);
  PlanningResult r;
  for (int k = 0; k < kFutureSteps; ++k) r.waypoints[k] = {t.at(k, 0), t.at(k, 1)};
  return r;
}

// One 6 x 2 trajectory per unmasked agent, in slot order. Waypoints are
// displacements from the agent's t=0 position.
inline std::vector<Tensor> motion_head(const Tensor& q_agents_refined,
                                       const std::vector<bool>& mask, const HeadParams& p) {
  std::vector<Tensor> out;
  if (!q_agents_refined.defined()) return out;
  if (static_cast<int>(mask.size()) != q_agents_refined.rows())
    throw ShapeError("motion_head: mask length mismatch");
  const Tensor preds = add_rowvec(matmul(q_agents_refined, p.motion_w), p.motion_b);
  for (int i = 0; i < preds.rows(); ++i)
    if (mask[i]) out.push_back(reshape(scale(slice_rows(preds, i, 1), kMotionGain), kFutureSteps, 2));
  return out;
}

// Mean squared Euclidean distance over waypoints.
inline Tensor imitation_loss(const Tensor& pred, const Tensor& gt) {
  detail::check_same_shape(pred, gt, "imitation_loss");
  const Tensor d = sub(pred, gt);
  return scale(sum_all(mul(d, d)), 1.0 / pred.rows());
}

inline Tensor future_as_tensor(const std::vector<Vec2>& wpts) {
  Tensor t(static_cast<int>(wpts.size()), 2);
  for (size_t i = 0; i < wpts.size(); ++i) {
    t.at(static_cast<int>(i), 0) = wpts[i].x;
    t.at(static_cast<int>(i), 1) = wpts[i].y;
  }
  return t;
}

// Waypoints re-expressed as displacements from an origin; pairs with the
// motion head's output convention.
inline Tensor future_offsets_tensor(const std::vector<Vec2>& wpts, const Vec2& origin) {
  Tensor t(static_cast<int>(wpts.size()), 2);
  for (size_t i = 0; i < wpts.size(); ++i) {
    t.at(static_cast<int>(i), 0) = wpts[i].x - origin.x;
    t.at(static_cast<int>(i), 1) = wpts[i].y - origin.y;
  }
  return t;
}

inline Tensor det_target_row(const AgentState& a) {
  Tensor t(1, 6);
  double* v = t.data();
  v[0] = a.pos.x;
  v[1] = a.pos.y;
  v[2] = std::sin(a.heading);
  v[3] = std::cos(a.heading);
  v[4] = a.speed;
  v[5] = std::log(a.length * a.width);
  return t;
}

inline Tensor map_target_row(const MapPolyline& pl) {
  Tensor t(1, 2 * kMapSamplePoints);
  const auto pts = resample_polyline(pl.points, kMapSamplePoints);
  for (int i = 0; i < kMapSamplePoints; ++i) {
    t.data()[2 * i] = pts[i].x;
    t.data()[2 * i + 1] = pts[i].y;
  }
  return t;
}

// Auxiliary supervision: per-agent state regression and per-polyline point
// regression, masked slots excluded. Empty sets contribute loss 0. Slot i of
// the token matrices corresponds to scene.agents[i] / scene.map[i].
inline std::pair<Tensor, Tensor> aux_losses(const Tensor& agent_tokens,
                                            const std::vector<bool>& agents_mask,
                                            const Tensor& map_tokens,
                                            const std::vector<bool>& map_mask, const Scene& scene,
                                            const HeadParams& p) {
  Tensor det_loss = Tensor::zeros(1, 1);
  Tensor map_loss = Tensor::zeros(1, 1);
  if (agent_tokens.defined()) {
    std::vector<Tensor> rows, targets;
    for (size_t i = 0; i < agents_mask.size() && i < scene.agents.size(); ++i)
      if (agents_mask[i]) {
        rows.push_back(slice_rows(agent_tokens, static_cast<int>(i), 1));
        targets.push_back(det_target_row(scene.agents[i]));
      }
    if (!rows.empty()) {
      const Tensor preds =
          scale(add_rowvec(matmul(concat_rows(rows), p.det_w), p.det_b), kDetGain);
      const Tensor diff = sub(preds, concat_rows(targets));
      det_loss = mean_all(mul(diff, diff));
    }
  }
  if (map_tokens.defined()) {
    std::vector<Tensor> rows, targets;
    for (size_t i = 0; i < map_mask.size() && i < scene.map.size(); ++i)
      if (map_mask[i]) {
        rows.push_back(slice_rows(map_tokens, static_cast<int>(i), 1));
        targets.push_back(map_target_row(scene.map[i]));
      }
    if (!rows.empty()) {
      const Tensor preds =
          scale(add_rowvec(matmul(concat_rows(rows), p.map_w), p.map_b), kMapGain);
      const Tensor diff = sub(preds, concat_rows(targets));
      map_loss = mean_all(mul(diff, diff));
    }
  }
  return {det_loss, map_loss};
}

}  // namespace dp
