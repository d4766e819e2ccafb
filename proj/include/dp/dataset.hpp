#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dp/common.hpp"
#include "dp/scene.hpp"

namespace dp {

inline constexpr int kDatasetSchemaVersion = 1;

// JSON-Lines dataset: line 1 is {"schema_version":1}, then one scene object
// per line. Floats are written with 17 significant digits so the round-trip
// is lossless; the writer emits text directly to keep the byte layout stable.

namespace ds_detail {

inline void append_vec2(std::string& out, const Vec2& p) {
  out += '[';
  out += fmt_g17(p.x);
  out += ',';
  out += fmt_g17(p.y);
  out += ']';
}

inline void append_points(std::string& out, const std::vector<Vec2>& pts) {
  out += '[';
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ',';
    append_vec2(out, pts[i]);
  }
  out += ']';
}

inline void append_agent(std::string& out, const AgentState& a) {
  out += "{\"id\":";
  out += std::to_string(a.id);
  out += ",\"class\":\"";
  out += to_string(a.cls);
  out += "\",\"pos\":";
  append_vec2(out, a.pos);
  out += ",\"heading\":";
  out += fmt_g17(a.heading);
  out += ",\"speed\":";
  out += fmt_g17(a.speed);
  out += ",\"yaw_rate\":";
  out += fmt_g17(a.yaw_rate);
  out += ",\"size\":[";
  out += fmt_g17(a.length);
  out += ',';
  out += fmt_g17(a.width);
  out += "]}";
}

inline void append_tokens(std::string& out, const char* key, const std::vector<int>& toks) {
  out += ",\"";
  out += key;
  out += "\":[";
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(toks[i]);
  }
  out += ']';
}

inline Vec2 parse_vec2(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw DataError("expected [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vec2> parse_points(const nlohmann::json& j) {
  std::vector<Vec2> out;
  for (const auto& p : j) out.push_back(parse_vec2(p));
  return out;
}

inline AgentState parse_agent(const nlohmann::json& j) {
  AgentState a;
  a.id = j.at("id").get<int>();
  a.cls = agent_class_from(j.at("class").get<std::string>());
  a.pos = parse_vec2(j.at("pos"));
  a.heading = j.at("heading").get<double>();
  a.speed = j.at("speed").get<double>();
  a.yaw_rate = j.at("yaw_rate").get<double>();
  const auto& size = j.at("size");
  a.length = size.at(0).get<double>();
  a.width = size.at(1).get<double>();
  return a;
}

}  // namespace ds_detail

inline std::string scene_to_json_line(const Scene& s) {
  using namespace ds_detail;
  std::string out;
  out.reserve(1024);
  out += "{\"ego\":";
  append_agent(out, s.ego);
  out += ",\"agents\":[";
  for (size_t i = 0; i < s.agents.size(); ++i) {
    if (i) out += ',';
    append_agent(out, s.agents[i]);
  }
  out += "],\"map\":[";
  for (size_t i = 0; i < s.map.size(); ++i) {
    if (i) out += ',';
    out += "{\"kind\":\"";
    out += to_string(s.map[i].kind);
    out += "\",\"points\":";
    append_points(out, s.map[i].points);
    out += '}';
  }
  out += "],\"gt_future\":{\"ego\":";
  append_points(out, s.ego_future);
  out += ",\"agents\":[";
  for (size_t i = 0; i < s.agent_futures.size(); ++i) {
    if (i) out += ',';
    append_points(out, s.agent_futures[i]);
  }
  out += "]},\"command\":\"";
  out += to_string(s.command);
  out += '"';
  if (!s.ald_tokens.empty()) append_tokens(out, "ald_tokens", s.ald_tokens);
  if (!s.gld_tokens.empty()) append_tokens(out, "gld_tokens", s.gld_tokens);
  out += '}';
  return out;
}

inline Scene scene_from_json(const nlohmann::json& j) {
  using namespace ds_detail;
  Scene s;
  s.ego = parse_agent(j.at("ego"));
  for (const auto& a : j.at("agents")) s.agents.push_back(parse_agent(a));
  for (const auto& m : j.at("map")) {
    MapPolyline pl;
    pl.kind = poly_kind_from(m.at("kind").get<std::string>());
    pl.points = parse_points(m.at("points"));
    s.map.push_back(std::move(pl));
  }
  const auto& fut = j.at("gt_future");
  s.ego_future = parse_points(fut.at("ego"));
  for (const auto& af : fut.at("agents")) s.agent_futures.push_back(parse_points(af));
  s.command = command_from(j.at("command").get<std::string>());
  if (j.contains("ald_tokens"))
    for (const auto& t : j.at("ald_tokens")) s.ald_tokens.push_back(t.get<int>());
  if (j.contains("gld_tokens"))
    for (const auto& t : j.at("gld_tokens")) s.gld_tokens.push_back(t.get<int>());
  return s;
}

inline void write_dataset(const std::vector<Scene>& scenes, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  os << "{\"schema_version\":" << kDatasetSchemaVersion << "}\n";
  for (const auto& s : scenes) os << scene_to_json_line(s) << '\n';
  if (!os) throw DataError("write failed: " + path);
}

inline std::vector<Scene> read_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  std::vector<Scene> scenes;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (line_no == 1) {
        const int v = j.at("schema_version").get<int>();
        if (v != kDatasetSchemaVersion)
          throw DataError("unsupported schema version " + std::to_string(v));
        continue;
      }
      scenes.push_back(scene_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (line_no == 0) throw DataError(path + ": line 1: missing schema header");
  return scenes;
}

}  // namespace dp
