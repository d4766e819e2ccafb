#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dp/scene.hpp"
#include "dp/vocab.hpp"

namespace dp {

// Deterministic rule-based describer. Emits token sequences about the agents
// that matter for the ego's next 3 seconds (attention mode) or about all
// nearby agents (global mode).

namespace desc_detail {

inline constexpr double kCorridorDist = 3.5;   // nominal lane width
inline constexpr double kImmediateDist = 5.0;
inline constexpr double kNearDist = 10.0;
inline constexpr double kMidDist = 25.0;
inline constexpr double kGlobalDist = 30.0;
inline constexpr double kStaticRate = 0.2;     // m/s
inline constexpr double kCrossLateral = 0.5;   // m/s
inline constexpr int kMaxAldClauses = 4;
// Grammar arithmetic: a clause costs 4 tokens plus a separating SEP, so at
// most 4 clauses fit in kMaxDescLen with BOS/EOS framing. The global mode is
// capped by the same bound.
inline constexpr int kMaxGldClauses = 4;

struct Candidate {
  size_t agent_idx = 0;
  double current_dist = 0.0;
  double min_aligned_dist = 0.0;
  double t_closest = 0.0;
};

// Min distance between the agent's constant-velocity rollout and the ego GT
// future at the six aligned future timestamps, plus the argmin time.
inline void aligned_approach(const AgentState& a, const std::vector<Vec2>& ego_future,
                             double& min_dist, double& t_min) {
  const Vec2 vel = a.velocity();
  min_dist = std::numeric_limits<double>::infinity();
  t_min = 0.0;
  for (int k = 1; k <= kFutureSteps; ++k) {
    const double t = kFutureDt * k;
    const Vec2 ap = a.pos + vel * t;
    const double d = distance(ap, ego_future[k - 1]);
    if (d < min_dist) {
      min_dist = d;
      t_min = t;
    }
  }
}

inline int side_token(const Vec2& p) {
  if (std::abs(p.y) <= std::abs(p.x)) return p.x >= 0.0 ? tok::AHEAD : tok::BEHIND;
  return p.y > 0.0 ? tok::LEFT : tok::RIGHT;
}

inline int distance_token(double d) {
  if (d < kNearDist) return tok::NEAR;
  if (d < kMidDist) return tok::MID;
  return tok::FAR;
}

// Motion from t=0 geometry: range rate toward the ego origin, except that a
// pedestrian cutting across the ego path (|v_y| above threshold) is CROSSING.
inline int motion_token(const AgentState& a) {
  const Vec2 vel = a.velocity();
  if (a.cls == AgentClass::pedestrian && std::abs(vel.y) > kCrossLateral) return tok::CROSSING;
  const double r = a.pos.norm();
  const double rate = r > 1e-9 ? (a.pos.x * vel.x + a.pos.y * vel.y) / r : 0.0;
  if (std::abs(rate) < kStaticRate) return tok::STATIC;
  return rate < 0.0 ? tok::APPROACHING : tok::RECEDING;
}

inline int class_token(AgentClass c) {
  switch (c) {
    case AgentClass::car: return tok::CAR;
    case AgentClass::pedestrian: return tok::PED;
    default: return tok::CYCLIST;
  }
}

inline void append_clause(Description& d, const Scene& scene, size_t idx, bool first) {
  const AgentState& a = scene.agents[idx];
  if (!first) d.push_back(tok::SEP);
  d.push_back(class_token(a.cls));
  d.push_back(side_token(a.pos));
  d.push_back(distance_token(a.pos.norm()));
  d.push_back(motion_token(a));
}

inline Description emit(const Scene& scene, const std::vector<Candidate>& sorted, int max_clauses) {
  Description d{tok::BOS};
  if (sorted.empty()) {
    d.push_back(tok::NONE);
  } else {
    const int n = std::min<int>(max_clauses, static_cast<int>(sorted.size()));
    for (int i = 0; i < n; ++i) append_clause(d, scene, sorted[i].agent_idx, i == 0);
  }
  d.push_back(tok::EOS);
  return d;
}

}  // namespace desc_detail

// Attention description: agents whose constant-velocity rollout comes within
// the corridor threshold of the ego GT future over the horizon, or that are
// already within the immediate radius. Ordered by time of closest approach.
inline Description attention_description(const Scene& scene) {
  using namespace desc_detail;
  std::vector<Candidate> cands;
  for (size_t i = 0; i < scene.agents.size(); ++i) {
    Candidate c;
    c.agent_idx = i;
    c.current_dist = scene.agents[i].pos.norm();
    aligned_approach(scene.agents[i], scene.ego_future, c.min_aligned_dist, c.t_closest);
    if (c.min_aligned_dist < kCorridorDist || c.current_dist < kImmediateDist)
      cands.push_back(c);
  }
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.t_closest != b.t_closest) return a.t_closest < b.t_closest;
    if (a.current_dist != b.current_dist) return a.current_dist < b.current_dist;
    return scene.agents[a.agent_idx].id < scene.agents[b.agent_idx].id;
  });
  return emit(scene, cands, kMaxAldClauses);
}

// Global description: every agent within 30 m, nearest first.
inline Description global_description(const Scene& scene) {
  using namespace desc_detail;
  std::vector<Candidate> cands;
  for (size_t i = 0; i < scene.agents.size(); ++i) {
    Candidate c;
    c.agent_idx = i;
    c.current_dist = scene.agents[i].pos.norm();
    if (c.current_dist < kGlobalDist) cands.push_back(c);
  }
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.current_dist != b.current_dist) return a.current_dist < b.current_dist;
    return scene.agents[a.agent_idx].id < scene.agents[b.agent_idx].id;
  });
  return emit(scene, cands, kMaxGldClauses);
}

}  // namespace dp
