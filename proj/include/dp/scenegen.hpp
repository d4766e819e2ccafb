#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dp/common.hpp"
#include "dp/geometry.hpp"
#include "dp/metrics.hpp"
#include "dp/scene.hpp"

namespace dp {

struct GeneratorConfig {
  double extent = 50.0;  // scene radius R, meters
  int max_agents = 16;
  int max_polylines = 8;
  // scenario mix; must sum to 1
  double p_follow = 0.40;
  double p_crossing = 0.25;
  double p_lane_change = 0.20;
  double p_turn = 0.15;
  int retry_budget = 64;
  double lane_width = 3.5;
  double ego_length = 4.0;
  double ego_width = 1.8;
  double ego_speed_min = 3.0;
  double ego_speed_max = 8.0;
};

// Constant-turn-rate rollout: per step, advance along the current heading and
// then integrate the yaw rate. Returns the position after each of `steps`
// updates.
inline std::vector<Vec2> rollout_ct(const AgentState& state, double dt, int steps) {
  if (dt <= 0.0 || steps < 1) throw ShapeError("rollout_ct: dt > 0 and steps >= 1 required");
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(steps));
  double x = state.pos.x, y = state.pos.y, th = state.heading;
  for (int i = 0; i < steps; ++i) {
    x += state.speed * std::cos(th) * dt;
    y += state.speed * std::sin(th) * dt;
    th += state.yaw_rate * dt;
    out.push_back({x, y});
  }
  return out;
}

// All scene invariants in one place; returns human-readable violations.
inline std::vector<std::string> validate_scene(const Scene& scene, const GeneratorConfig& cfg) {
  std::vector<std::string> issues;
  const double r = cfg.extent;
  if (scene.ego.id != 0) issues.push_back("ego id must be 0");
  if (scene.ego.cls != AgentClass::car) issues.push_back("ego class must be car");
  if (scene.ego.pos.norm() != 0.0 || scene.ego.heading != 0.0)
    issues.push_back("ego frame must have ego at origin heading +x");
  if (static_cast<int>(scene.agents.size()) > cfg.max_agents)
    issues.push_back("too many agents");
  if (static_cast<int>(scene.map.size()) > cfg.max_polylines)
    issues.push_back("too many polylines");
  if (scene.ego_future.size() != kFutureSteps) issues.push_back("ego future must have 6 waypoints");
  if (scene.agent_futures.size() != scene.agents.size())
    issues.push_back("one future per agent required");
  for (size_t i = 0; i < scene.agents.size(); ++i) {
    const auto& a = scene.agents[i];
    if (a.speed < 0.0) issues.push_back("agent speed must be >= 0");
    if (a.length <= 0.0 || a.width <= 0.0) issues.push_back("agent size must be positive");
    if (a.pos.norm() > r) issues.push_back("agent outside extent");
    if (i < scene.agent_futures.size()) {
      if (scene.agent_futures[i].size() != kFutureSteps) {
        issues.push_back("agent future must have 6 waypoints");
      } else {
        for (const Vec2& p : scene.agent_futures[i])
          if (p.norm() > 1.5 * r) {
            issues.push_back("agent future escapes 1.5R extent");
            break;
          }
      }
    }
  }
  for (const auto& pl : scene.map) {
    if (pl.points.size() < 2 || pl.points.size() > 10)
      issues.push_back("polyline must have 2..10 points");
    for (size_t i = 0; i < pl.points.size(); ++i) {
      if (pl.points[i].norm() > r) {
        issues.push_back("polyline point outside extent");
        break;
      }
      if (i > 0 && pl.points[i] == pl.points[i - 1]) {
        issues.push_back("consecutive polyline points must be distinct");
        break;
      }
    }
  }
  if (issues.empty()) {
    PlanningResult gt_plan;
    std::copy(scene.ego_future.begin(), scene.ego_future.end(), gt_plan.waypoints.begin());
    if (!plan_collision_free(gt_plan, scene, scene.ego.length, scene.ego.width))
      issues.push_back("ego ground-truth future collides with an agent future");
  }
  return issues;
}

namespace gen_detail {

enum class Scenario { follow, crossing, lane_change, turn };

inline double smoothstep(double u) {
  u = std::min(1.0, std::max(0.0, u));
  return u * u * (3.0 - 2.0 * u);
}

// Keeps every rollout waypoint within 1.5R: |pos| + v * 3s bounds the excursion.
inline double cap_speed(double v, const Vec2& pos, double extent) {
  const double budget = 0.9 * (1.5 * extent - pos.norm()) / (kFutureSteps * kFutureDt);
  return std::max(0.0, std::min(v, budget));
}

inline bool clear_of_others(const AgentState& cand, const Scene& scene, double margin) {
  const OrientedRect cr{cand.pos, cand.heading, cand.length + margin, cand.width + margin};
  const OrientedRect ego{scene.ego.pos, scene.ego.heading, scene.ego.length + 2.0 * margin,
                         scene.ego.width + 2.0 * margin};
  if (rect_intersect(cr, ego)) return false;
  for (const auto& a : scene.agents) {
    const OrientedRect ar{a.pos, a.heading, a.length, a.width};
    if (rect_intersect(cr, ar)) return false;
  }
  return true;
}

inline void push_agent(Scene& scene, AgentState a, const GeneratorConfig& cfg) {
  if (static_cast<int>(scene.agents.size()) >= cfg.max_agents) return;
  a.speed = cap_speed(a.speed, a.pos, cfg.extent);
  if (!clear_of_others(a, scene, 1.0)) return;
  a.id = static_cast<int>(scene.agents.size()) + 1;
  scene.agents.push_back(a);
}

inline std::vector<Vec2> straight_line(double y, double x0, double x1, int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back({x0 + (x1 - x0) * static_cast<double>(i) / (n - 1), y});
  return pts;
}

// Offset curve of a constant-curvature centerline through the origin.
inline std::vector<Vec2> arc_line(double curvature, double offset, double s0, double s1, int n,
                                  double keep_radius) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double s = s0 + (s1 - s0) * static_cast<double>(i) / (n - 1);
    const double th = curvature * s;
    Vec2 p;
    if (std::abs(curvature) < 1e-9) {
      p = {s, 0.0};
    } else {
      p = {std::sin(th) / curvature, (1.0 - std::cos(th)) / curvature};
    }
    const Vec2 normal{-std::sin(th), std::cos(th)};
    p = p + normal * offset;
    if (p.norm() <= keep_radius) pts.push_back(p);
  }
  return pts;
}

inline void build_map(Scene& scene, Scenario sc, double curvature, double crossing_x,
                      const GeneratorConfig& cfg) {
  const double half_lane = 0.5 * cfg.lane_width;
  const double road_edge = 1.5 * cfg.lane_width;
  const double reach = cfg.extent - 4.0;
  std::vector<MapPolyline> wanted;
  auto add = [&](PolyKind kind, std::vector<Vec2> pts) {
    if (pts.size() >= 2) wanted.push_back(MapPolyline{kind, std::move(pts)});
  };
  if (sc == Scenario::turn) {
    add(PolyKind::road_boundary, arc_line(curvature, road_edge, -14.0, 38.0, 8, reach));
    add(PolyKind::road_boundary, arc_line(curvature, -road_edge, -14.0, 38.0, 8, reach));
    add(PolyKind::lane_divider, arc_line(curvature, half_lane, -14.0, 38.0, 8, reach));
    add(PolyKind::lane_divider, arc_line(curvature, -half_lane, -14.0, 38.0, 8, reach));
  } else {
    add(PolyKind::road_boundary, straight_line(road_edge, -reach, reach, 6));
    add(PolyKind::road_boundary, straight_line(-road_edge, -reach, reach, 6));
    if (sc == Scenario::crossing)
      add(PolyKind::ped_crossing,
          {{crossing_x, -road_edge - 1.0}, {crossing_x, 0.0}, {crossing_x, road_edge + 1.0}});
    add(PolyKind::lane_divider, straight_line(half_lane, -reach, reach, 6));
    add(PolyKind::lane_divider, straight_line(-half_lane, -reach, reach, 6));
  }
  const int keep = std::min<int>(cfg.max_polylines, static_cast<int>(wanted.size()));
  scene.map.assign(wanted.begin(), wanted.begin() + keep);
}

}  // namespace gen_detail

// Deterministic synthetic scene: pure function of (seed, config). Regenerates
// up to cfg.retry_budget candidates until the ego ground-truth future is
// collision-free and every invariant holds.
inline Scene generate_scene(uint64_t seed, const GeneratorConfig& cfg) {
  using namespace gen_detail;
  const double psum = cfg.p_follow + cfg.p_crossing + cfg.p_lane_change + cfg.p_turn;
  if (std::abs(psum - 1.0) > 1e-6) throw ConfigError("scenario mix must sum to 1");
  if (cfg.max_agents < 0 || cfg.max_polylines < 0 || cfg.extent <= 0.0)
    throw ConfigError("invalid generator config");

  Rng rng(splitmix64(seed ^ 0x5ce4e5b9a3c2f1d7ull));
  for (int attempt = 0; attempt < cfg.retry_budget; ++attempt) {
    Scene scene;
    scene.ego.id = 0;
    scene.ego.cls = AgentClass::car;
    scene.ego.pos = {0.0, 0.0};
    scene.ego.heading = 0.0;
    scene.ego.length = cfg.ego_length;
    scene.ego.width = cfg.ego_width;
    scene.ego.speed = rng.uniform(cfg.ego_speed_min, cfg.ego_speed_max);
    scene.ego.yaw_rate = 0.0;

    const double u = rng.uniform();
    Scenario sc = Scenario::follow;
    if (u >= cfg.p_follow && u < cfg.p_follow + cfg.p_crossing) sc = Scenario::crossing;
    else if (u >= cfg.p_follow + cfg.p_crossing && u < cfg.p_follow + cfg.p_crossing + cfg.p_lane_change)
      sc = Scenario::lane_change;
    else if (u >= cfg.p_follow + cfg.p_crossing + cfg.p_lane_change) sc = Scenario::turn;

    const double v_ego = scene.ego.speed;
    double curvature = 0.0;
    double crossing_x = rng.uniform(8.0, 20.0);

    // command + ego ground-truth future
    switch (sc) {
      case Scenario::follow:
      case Scenario::crossing: {
        scene.command = Command::straight;
        scene.ego_future = rollout_ct(scene.ego, kFutureDt, kFutureSteps);
        break;
      }
      case Scenario::lane_change: {
        const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
        scene.command = dir > 0 ? Command::left : Command::right;
        for (int k = 1; k <= kFutureSteps; ++k) {
          const double t = kFutureDt * k;
          scene.ego_future.push_back(
              {v_ego * t, dir * cfg.lane_width * smoothstep(t / (kFutureSteps * kFutureDt))});
        }
        break;
      }
      case Scenario::turn: {
        const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
        scene.ego.yaw_rate = dir * rng.uniform(0.15, 0.35);
        scene.command = dir > 0 ? Command::left : Command::right;
        curvature = scene.ego.yaw_rate / v_ego;
        scene.ego_future = rollout_ct(scene.ego, kFutureDt, kFutureSteps);
        break;
      }
    }

    build_map(scene, sc, curvature, crossing_x, cfg);

    // scenario-defining agents
    if (cfg.max_agents > 0) {
      // oncoming car hugging the divider: crosses the attention corridor
      // without conflicting with the ego path
      auto push_oncoming = [&]() {
        AgentState car;
        car.cls = AgentClass::car;
        car.pos = {rng.uniform(12.0, 38.0), cfg.lane_width - rng.uniform(0.4, 1.2)};
        car.heading = 3.141592653589793 + rng.uniform(-0.02, 0.02);
        car.speed = rng.uniform(4.0, 9.0);
        car.length = rng.uniform(4.0, 5.2);
        car.width = rng.uniform(1.7, 2.0);
        push_agent(scene, car, cfg);
      };
      switch (sc) {
        case Scenario::follow: {
          AgentState lead;
          lead.cls = AgentClass::car;
          const double gap = rng.uniform(10.0, 24.0);
          lead.pos = {gap, rng.uniform(-0.25, 0.25)};
          lead.heading = rng.uniform(-0.03, 0.03);
          lead.speed = rng.uniform(std::max(2.0, 0.85 * v_ego), 1.25 * v_ego);
          // keep the closing distance over the horizon below the gap
          lead.speed = std::max(lead.speed, v_ego - (gap - 6.0) / 3.0);
          lead.yaw_rate = rng.uniform(-0.04, 0.04);
          lead.length = rng.uniform(4.0, 5.2);
          lead.width = rng.uniform(1.7, 2.1);
          push_agent(scene, lead, cfg);
          if (rng.bernoulli(0.6)) push_oncoming();
          if (rng.bernoulli(0.25)) {
            AgentState tail;  // close behind, caught by the immediate-radius rule
            tail.cls = AgentClass::car;
            tail.pos = {-rng.uniform(4.6, 5.4), rng.uniform(-0.2, 0.2)};
            tail.speed = v_ego + rng.uniform(-0.3, 0.2);
            tail.length = rng.uniform(4.0, 4.6);
            tail.width = rng.uniform(1.7, 2.0);
            push_agent(scene, tail, cfg);
          }
          break;
        }
        case Scenario::crossing: {
          AgentState ped;
          ped.cls = AgentClass::pedestrian;
          const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
          // time the crossing to pass just ahead of or just behind the ego:
          // inside the attention corridor, outside the collision envelope
          const double x_conflict = v_ego * rng.uniform(1.2, 2.2);
          const double t_pass = x_conflict / v_ego;
          const double dt_min = 0.75 + 2.8 / v_ego;
          const double dt = (rng.bernoulli(0.5) ? 1.0 : -1.0) * dt_min * rng.uniform(1.0, 1.4);
          const double t_reach = std::max(0.8, t_pass + dt);
          double v_ped = rng.uniform(0.9, 1.8);
          double y0 = std::min(8.0, std::max(2.8, v_ped * t_reach));
          v_ped = y0 / t_reach;
          ped.pos = {x_conflict + rng.uniform(-0.5, 0.5), side * y0};
          ped.heading = side > 0 ? -1.5707963267948966 : 1.5707963267948966;
          ped.speed = std::min(2.2, v_ped);
          ped.length = rng.uniform(0.5, 0.8);
          ped.width = rng.uniform(0.5, 0.8);
          push_agent(scene, ped, cfg);
          if (rng.bernoulli(0.35)) push_oncoming();
          break;
        }
        case Scenario::lane_change: {
          const double dir = scene.command == Command::left ? 1.0 : -1.0;
          AgentState slow;  // reason to change lanes
          slow.cls = AgentClass::car;
          const double gap = rng.uniform(11.0, 20.0);
          slow.pos = {gap, rng.uniform(-0.25, 0.25)};
          slow.speed = std::max(rng.uniform(0.35, 0.65) * v_ego, v_ego - (gap - 6.0) / 3.0);
          slow.length = rng.uniform(4.0, 5.2);
          slow.width = rng.uniform(1.7, 2.1);
          push_agent(scene, slow, cfg);
          AgentState other;  // traffic in the target lane
          other.cls = AgentClass::car;
          if (rng.bernoulli(0.5)) {
            other.pos = {rng.uniform(-20.0, -9.0), dir * cfg.lane_width + rng.uniform(-0.3, 0.3)};
            other.speed = rng.uniform(0.5, 1.0) * v_ego;
          } else {
            other.pos = {rng.uniform(14.0, 28.0), dir * cfg.lane_width + rng.uniform(-0.3, 0.3)};
            other.speed = rng.uniform(0.9, 1.3) * v_ego;
          }
          other.length = rng.uniform(4.0, 5.2);
          other.width = rng.uniform(1.7, 2.1);
          push_agent(scene, other, cfg);
          if (rng.bernoulli(0.35)) push_oncoming();
          break;
        }
        case Scenario::turn: {
          const int parked = static_cast<int>(rng.uniform_int(3));
          for (int i = 0; i < parked; ++i) {
            AgentState car;
            car.cls = AgentClass::car;
            const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
            car.pos = {rng.uniform(-28.0, 28.0), side * rng.uniform(6.5, 9.0)};
            car.heading = rng.bernoulli(0.5) ? 0.0 : 3.141592653589793;
            car.speed = 0.0;
            car.length = rng.uniform(4.0, 5.2);
            car.width = rng.uniform(1.7, 2.1);
            push_agent(scene, car, cfg);
          }
          if (rng.bernoulli(0.4)) push_oncoming();
          break;
        }
      }

      // background traffic
      const int fillers =
          sc == Scenario::turn ? static_cast<int>(rng.uniform_int(2)) : static_cast<int>(rng.uniform_int(7));
      for (int i = 0; i < fillers; ++i) {
        AgentState a;
        const double cls_u = rng.uniform();
        if (cls_u < 0.55) {
          a.cls = AgentClass::car;
          const int lane = static_cast<int>(rng.uniform_int(3)) - 1;  // -1, 0, 1
          a.pos = {rng.uniform(-44.0, 44.0), lane * cfg.lane_width + rng.uniform(-0.3, 0.3)};
          if (lane == 0) {
            // keep the ego corridor clear ahead
            if (a.pos.x > -8.0) a.pos.x = rng.uniform(-44.0, -8.0);
            a.heading = rng.uniform(-0.03, 0.03);
          } else {
            a.heading = lane > 0 ? 3.141592653589793 + rng.uniform(-0.03, 0.03)
                                 : rng.uniform(-0.03, 0.03);
          }
          a.speed = rng.uniform(2.0, 9.0);
          a.yaw_rate = rng.uniform(-0.06, 0.06);
          a.length = rng.uniform(4.0, 5.2);
          a.width = rng.uniform(1.7, 2.1);
        } else if (cls_u < 0.80) {
          a.cls = AgentClass::pedestrian;
          const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
          a.pos = {rng.uniform(-40.0, 40.0), side * rng.uniform(6.0, 9.0)};
          a.heading = rng.bernoulli(0.5) ? 0.0 : 3.141592653589793;
          a.speed = rng.uniform(0.4, 1.6);
          a.length = rng.uniform(0.5, 0.8);
          a.width = rng.uniform(0.5, 0.8);
        } else {
          a.cls = AgentClass::cyclist;
          const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
          // some cyclists ride close enough to the lane edge to matter
          a.pos = {rng.uniform(-40.0, 40.0), side * rng.uniform(2.3, 5.5)};
          a.heading = side > 0 ? 3.141592653589793 : 0.0;
          a.speed = rng.uniform(1.5, 5.0);
          a.yaw_rate = rng.uniform(-0.04, 0.04);
          a.length = 1.8;
          a.width = 0.6;
        }
        push_agent(scene, a, cfg);
      }
    }

    scene.agent_futures.clear();
    for (const auto& a : scene.agents)
      scene.agent_futures.push_back(rollout_ct(a, kFutureDt, kFutureSteps));

    if (validate_scene(scene, cfg).empty()) return scene;
  }
  throw DataError("unsatisfiable scene config: retry budget exhausted");
}

}  // namespace dp
