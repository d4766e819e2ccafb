#pragma once

#include <string>
#include <vector>

#include "dp/common.hpp"
#include "dp/geometry.hpp"

namespace dp {

inline constexpr int kFutureSteps = 6;     // 3 s at 2 Hz
inline constexpr double kFutureDt = 0.5;   // seconds between waypoints

enum class AgentClass { car, pedestrian, cyclist };
enum class PolyKind { lane_divider, road_boundary, ped_crossing };
enum class Command { left, straight, right };

inline const char* to_string(AgentClass c) {
  switch (c) {
    case AgentClass::car: return "car";
    case AgentClass::pedestrian: return "pedestrian";
    default: return "cyclist";
  }
}
inline const char* to_string(PolyKind k) {
  switch (k) {
    case PolyKind::lane_divider: return "lane_divider";
    case PolyKind::road_boundary: return "road_boundary";
    default: return "ped_crossing";
  }
}
inline const char* to_string(Command c) {
  switch (c) {
    case Command::left: return "left";
    case Command::straight: return "straight";
    default: return "right";
  }
}

inline AgentClass agent_class_from(const std::string& s) {
  if (s == "car") return AgentClass::car;
  if (s == "pedestrian") return AgentClass::pedestrian;
  if (s == "cyclist") return AgentClass::cyclist;
  throw DataError("unknown agent class: " + s);
}
inline PolyKind poly_kind_from(const std::string& s) {
  if (s == "lane_divider") return PolyKind::lane_divider;
  if (s == "road_boundary") return PolyKind::road_boundary;
  if (s == "ped_crossing") return PolyKind::ped_crossing;
  throw DataError("unknown polyline kind: " + s);
}
inline Command command_from(const std::string& s) {
  if (s == "left") return Command::left;
  if (s == "straight") return Command::straight;
  if (s == "right") return Command::right;
  throw DataError("unknown command: " + s);
}

// Kinematic state at t = 0 in the ego frame (ego at origin, heading +x).
struct AgentState {
  int id = 0;
  AgentClass cls = AgentClass::car;
  Vec2 pos;
  double heading = 0.0;
  double speed = 0.0;     // m/s, >= 0
  double yaw_rate = 0.0;  // rad/s
  double length = 4.0;
  double width = 1.8;

  Vec2 velocity() const { return {speed * std::cos(heading), speed * std::sin(heading)}; }

  bool operator==(const AgentState& o) const {
    return id == o.id && cls == o.cls && pos == o.pos && heading == o.heading &&
           speed == o.speed && yaw_rate == o.yaw_rate && length == o.length && width == o.width;
  }
};

struct MapPolyline {
  PolyKind kind = PolyKind::lane_divider;
  std::vector<Vec2> points;  // 2..10 points

  bool operator==(const MapPolyline& o) const { return kind == o.kind && points == o.points; }
};

// One synthetic driving scene. Ground-truth futures are 6 waypoints at 0.5 s
// spacing for the ego and every agent; the ego future is collision-free
// against all agent futures by construction.
struct Scene {
  AgentState ego;  // id 0, class car
  std::vector<AgentState> agents;
  std::vector<MapPolyline> map;
  std::vector<Vec2> ego_future;                  // exactly kFutureSteps
  std::vector<std::vector<Vec2>> agent_futures;  // one per agent, each kFutureSteps
  Command command = Command::straight;
  std::vector<int> ald_tokens;  // attention description, may be empty if unset
  std::vector<int> gld_tokens;  // global description, may be empty if unset

  bool operator==(const Scene& o) const {
    return ego == o.ego && agents == o.agents && map == o.map && ego_future == o.ego_future &&
           agent_futures == o.agent_futures && command == o.command &&
           ald_tokens == o.ald_tokens && gld_tokens == o.gld_tokens;
  }
};

}  // namespace dp
