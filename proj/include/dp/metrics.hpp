#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dp/common.hpp"
#include "dp/geometry.hpp"
#include "dp/scene.hpp"

namespace dp {

// Planned ego trajectory: 6 future waypoints at 0.5 s spacing, ego frame.
struct PlanningResult {
  std::array<Vec2, kFutureSteps> waypoints{};
};

// at_horizon: value sampled at the horizon waypoint itself.
// avg_up_to:  mean over all waypoints up to and including the horizon.
enum class MetricMode { at_horizon, avg_up_to };

inline const char* to_string(MetricMode m) {
  return m == MetricMode::at_horizon ? "at_horizon" : "avg_up_to";
}
inline MetricMode metric_mode_from(const std::string& s) {
  if (s == "at_horizon") return MetricMode::at_horizon;
  if (s == "avg_up_to") return MetricMode::avg_up_to;
  throw ConfigError("unknown metric mode: " + s);
}

// Horizons 1s/2s/3s correspond to waypoint indices 1, 3, 5 (0-based).
inline constexpr int kHorizonIdx[3] = {1, 3, 5};

inline std::array<double, 3> l2_error(const PlanningResult& plan, const std::vector<Vec2>& gt,
                                      MetricMode mode) {
  if (gt.size() != kFutureSteps) throw ShapeError("l2_error: ground truth must have 6 waypoints");
  std::array<double, kFutureSteps> err{};
  for (int i = 0; i < kFutureSteps; ++i) err[i] = distance(plan.waypoints[i], gt[i]);
  std::array<double, 3> out{};
  for (int h = 0; h < 3; ++h) {
    if (mode == MetricMode::at_horizon) {
      out[h] = err[kHorizonIdx[h]];
    } else {
      double acc = 0.0;
      const int n = kHorizonIdx[h] + 1;
      for (int i = 0; i < n; ++i) acc += err[i];
      out[h] = acc / n;
    }
  }
  return out;
}

// Heading at each waypoint from the displacement since the previous one; the
// first waypoint differences against `origin`. Degenerate displacement falls
// back to `fallback_heading`.
inline std::array<double, kFutureSteps> waypoint_headings(const Vec2& origin,
                                                          const std::vector<Vec2>& wpts,
                                                          double fallback_heading) {
  std::array<double, kFutureSteps> out{};
  Vec2 prev = origin;
  for (int i = 0; i < kFutureSteps; ++i) {
    const Vec2 d = wpts[i] - prev;
    out[i] = (d.norm() > 1e-9) ? std::atan2(d.y, d.x) : fallback_heading;
    prev = wpts[i];
  }
  return out;
}

inline std::array<double, kFutureSteps> plan_headings(const PlanningResult& plan) {
  std::vector<Vec2> w(plan.waypoints.begin(), plan.waypoints.end());
  return waypoint_headings(Vec2{0.0, 0.0}, w, 0.0);
}

// Oriented footprint of an agent at future step k (0-based), following its GT
// trajectory. Static agents keep their t=0 heading.
inline OrientedRect agent_footprint_at(const AgentState& agent, const std::vector<Vec2>& future,
                                       int k) {
  const auto headings = waypoint_headings(agent.pos, future, agent.heading);
  return OrientedRect{future[k], headings[k], agent.length, agent.width};
}

// Does the planned ego footprint collide with any agent's GT footprint at
// future step k? Ego heading comes from plan waypoint differences (fallback 0).
inline bool plan_collides_at(const PlanningResult& plan, const Scene& scene,
                             double ego_length, double ego_width, int k) {
  const auto eh = plan_headings(plan);
  const OrientedRect ego_rect{plan.waypoints[k], eh[k], ego_length, ego_width};
  for (size_t a = 0; a < scene.agents.size(); ++a) {
    if (rect_intersect(ego_rect, agent_footprint_at(scene.agents[a], scene.agent_futures[a], k)))
      return true;
  }
  return false;
}

inline bool plan_collision_free(const PlanningResult& plan, const Scene& scene,
                                double ego_length, double ego_width) {
  for (int k = 0; k < kFutureSteps; ++k)
    if (plan_collides_at(plan, scene, ego_length, ego_width, k)) return false;
  return true;
}

inline std::array<double, 3> collision_rate(const std::vector<PlanningResult>& plans,
                                            const std::vector<Scene>& scenes, double ego_length,
                                            double ego_width, MetricMode mode) {
  if (plans.size() != scenes.size()) throw ShapeError("collision_rate: one plan per scene");
  std::array<double, 3> out{};
  if (plans.empty()) return out;
  for (size_t s = 0; s < plans.size(); ++s) {
    std::array<bool, kFutureSteps> hit{};
    for (int k = 0; k < kFutureSteps; ++k)
      hit[k] = plan_collides_at(plans[s], scenes[s], ego_length, ego_width, k);
    for (int h = 0; h < 3; ++h) {
      const int n = kHorizonIdx[h] + 1;
      if (mode == MetricMode::at_horizon) {
        bool any = false;
        for (int k = 0; k < n; ++k) any = any || hit[k];
        out[h] += any ? 1.0 : 0.0;
      } else {
        int c = 0;
        for (int k = 0; k < n; ++k) c += hit[k] ? 1 : 0;
        out[h] += static_cast<double>(c) / n;
      }
    }
  }
  for (double& v : out) v /= static_cast<double>(plans.size());
  return out;
}

struct MetricsReport {
  MetricMode mode = MetricMode::at_horizon;
  int scene_count = 0;
  std::array<double, 3> l2{};  // 1s, 2s, 3s
  double l2_avg = 0.0;
  std::array<double, 3> cr{};  // fractions
  double cr_avg = 0.0;
};

inline MetricsReport evaluate_plans(const std::vector<PlanningResult>& plans,
                                    const std::vector<Scene>& scenes, double ego_length,
                                    double ego_width, MetricMode mode) {
  if (plans.size() != scenes.size()) throw ShapeError("evaluate_plans: one plan per scene");
  MetricsReport r;
  r.mode = mode;
  r.scene_count = static_cast<int>(plans.size());
  if (plans.empty()) return r;
  for (size_t s = 0; s < plans.size(); ++s) {
    const auto l2 = l2_error(plans[s], scenes[s].ego_future, mode);
    for (int h = 0; h < 3; ++h) r.l2[h] += l2[h];
  }
  for (int h = 0; h < 3; ++h) r.l2[h] /= static_cast<double>(plans.size());
  r.cr = collision_rate(plans, scenes, ego_length, ego_width, mode);
  r.l2_avg = (r.l2[0] + r.l2[1] + r.l2[2]) / 3.0;
  r.cr_avg = (r.cr[0] + r.cr[1] + r.cr[2]) / 3.0;
  return r;
}

inline constexpr const char* kMetricsCsvHeader =
    "mode,scenes,l2_1s,l2_2s,l2_3s,l2_avg,cr_1s,cr_2s,cr_3s,cr_avg";

inline std::string metrics_csv_row(const MetricsReport& r) {
  std::string row = std::string(to_string(r.mode)) + "," + std::to_string(r.scene_count);
  for (int h = 0; h < 3; ++h) row += "," + fmt_fixed(r.l2[h], 6);
  row += "," + fmt_fixed(r.l2_avg, 6);
  for (int h = 0; h < 3; ++h) row += "," + fmt_fixed(r.cr[h], 6);
  row += "," + fmt_fixed(r.cr_avg, 6);
  return row;
}

}  // namespace dp
