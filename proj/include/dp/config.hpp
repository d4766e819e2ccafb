#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "dp/common.hpp"
#include "dp/metrics.hpp"
#include "dp/scenegen.hpp"

namespace dp {

enum class DescriptionMode { ald, gld };

inline const char* to_string(DescriptionMode m) { return m == DescriptionMode::ald ? "ald" : "gld"; }
inline DescriptionMode description_mode_from(const std::string& s) {
  if (s == "ald") return DescriptionMode::ald;
  if (s == "gld") return DescriptionMode::gld;
  throw ConfigError("unknown description mode: " + s);
}

// Run configuration. Text form is flat `key = value` lines with dotted keys;
// unknown keys are an error. All fields have desk-scale defaults.
struct Config {
  uint64_t seed = 0;
  GeneratorConfig gen;

  int d = 64;  // token width; the BEV encoder output must match
  int bev_h = 32;
  int bev_w = 32;
  int d_bev = 64;
  int tgm_layers = 2;

  double w_plan = 1.0;
  double w_motion = 0.5;
  double w_det = 0.5;
  double w_map = 0.5;
  double w_itm = 0.5;
  double w_itg = 0.5;

  double lr = 2e-4;
  double weight_decay = 0.01;
  int epochs_phase1 = 20;
  int epochs_phase2 = 40;
  int batch_size = 8;

  bool tgm_enabled = true;
  bool lgam_enabled = true;
  DescriptionMode description_mode = DescriptionMode::ald;
  MetricMode metric_mode = MetricMode::at_horizon;
  int train_count = 256;  // leading scenes of a dataset used for training

  void validate() const {
    if (d <= 0 || bev_h <= 0 || bev_w <= 0 || d_bev <= 0 || tgm_layers <= 0)
      throw ConfigError("model dims must be positive");
    if (d_bev != d)
      throw ConfigError("model.d_bev must equal model.d (tokens add the sampled BEV feature)");
    if (w_plan < 0 || w_motion < 0 || w_det < 0 || w_map < 0 || w_itm < 0 || w_itg < 0)
      throw ConfigError("loss weights must be >= 0");
    if (lr <= 0 || weight_decay < 0) throw ConfigError("invalid optimizer settings");
    if (epochs_phase1 <= 0 || epochs_phase2 <= 0 || batch_size <= 0)
      throw ConfigError("epochs and batch size must be positive");
    if (train_count < 0) throw ConfigError("data.train_count must be >= 0");
    if (std::abs(gen.p_follow + gen.p_crossing + gen.p_lane_change + gen.p_turn - 1.0) > 1e-6)
      throw ConfigError("gen scenario mix must sum to 1");
  }
};

namespace cfg_detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected boolean for " + key + ", got '" + v + "'");
}

inline double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') throw ConfigError("expected number for " + key);
  return d;
}

inline long long parse_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') throw ConfigError("expected integer for " + key);
  return i;
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace cfg_detail

inline void apply_config_line(Config& c, const std::string& key, const std::string& value) {
  using namespace cfg_detail;
  auto d = [&] { return parse_double(value, key); };
  auto i = [&] { return static_cast<int>(parse_int(value, key)); };
  auto b = [&] { return parse_bool(value, key); };

  if (key == "seed") c.seed = static_cast<uint64_t>(parse_int(value, key));
  else if (key == "gen.extent") c.gen.extent = d();
  else if (key == "gen.max_agents") c.gen.max_agents = i();
  else if (key == "gen.max_polylines") c.gen.max_polylines = i();
  else if (key == "gen.p_follow") c.gen.p_follow = d();
  else if (key == "gen.p_crossing") c.gen.p_crossing = d();
  else if (key == "gen.p_lane_change") c.gen.p_lane_change = d();
  else if (key == "gen.p_turn") c.gen.p_turn = d();
  else if (key == "gen.retry_budget") c.gen.retry_budget = i();
  else if (key == "model.d") c.d = i();
  else if (key == "model.bev_h") c.bev_h = i();
  else if (key == "model.bev_w") c.bev_w = i();
  else if (key == "model.d_bev") c.d_bev = i();
  else if (key == "model.tgm_layers") c.tgm_layers = i();
  else if (key == "loss.plan") c.w_plan = d();
  else if (key == "loss.motion") c.w_motion = d();
  else if (key == "loss.det") c.w_det = d();
  else if (key == "loss.map") c.w_map = d();
  else if (key == "loss.itm") c.w_itm = d();
  else if (key == "loss.itg") c.w_itg = d();
  else if (key == "optim.lr") c.lr = d();
  else if (key == "optim.weight_decay") c.weight_decay = d();
  else if (key == "optim.epochs_phase1") c.epochs_phase1 = i();
  else if (key == "optim.epochs_phase2") c.epochs_phase2 = i();
  else if (key == "optim.batch_size") c.batch_size = i();
  else if (key == "tgm.enabled") c.tgm_enabled = b();
  else if (key == "lgam.enabled") c.lgam_enabled = b();
  else if (key == "description_mode") c.description_mode = description_mode_from(value);
  else if (key == "metric.mode") c.metric_mode = metric_mode_from(value);
  else if (key == "data.train_count") c.train_count = i();
  else throw ConfigError("unknown config key: " + key);
}

inline Config parse_config_text(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = cfg_detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = cfg_detail::trim(t.substr(0, eq));
    const std::string value = cfg_detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    apply_config_line(c, key, value);
  }
  c.validate();
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

// Canonical serialization: every key in fixed order. Feeds the config hash
// and the checkpoint payload.
inline std::string config_text(const Config& c) {
  std::string o;
  auto kv = [&o](const char* k, const std::string& v) { o += std::string(k) + " = " + v + "\n"; };
  kv("seed", std::to_string(c.seed));
  kv("gen.extent", fmt_g17(c.gen.extent));
  kv("gen.max_agents", std::to_string(c.gen.max_agents));
  kv("gen.max_polylines", std::to_string(c.gen.max_polylines));
  kv("gen.p_follow", fmt_g17(c.gen.p_follow));
  kv("gen.p_crossing", fmt_g17(c.gen.p_crossing));
  kv("gen.p_lane_change", fmt_g17(c.gen.p_lane_change));
  kv("gen.p_turn", fmt_g17(c.gen.p_turn));
  kv("gen.retry_budget", std::to_string(c.gen.retry_budget));
  kv("model.d", std::to_string(c.d));
  kv("model.bev_h", std::to_string(c.bev_h));
  kv("model.bev_w", std::to_string(c.bev_w));
  kv("model.d_bev", std::to_string(c.d_bev));
  kv("model.tgm_layers", std::to_string(c.tgm_layers));
  kv("loss.plan", fmt_g17(c.w_plan));
  kv("loss.motion", fmt_g17(c.w_motion));
  kv("loss.det", fmt_g17(c.w_det));
  kv("loss.map", fmt_g17(c.w_map));
  kv("loss.itm", fmt_g17(c.w_itm));
  kv("loss.itg", fmt_g17(c.w_itg));
  kv("optim.lr", fmt_g17(c.lr));
  kv("optim.weight_decay", fmt_g17(c.weight_decay));
  kv("optim.epochs_phase1", std::to_string(c.epochs_phase1));
  kv("optim.epochs_phase2", std::to_string(c.epochs_phase2));
  kv("optim.batch_size", std::to_string(c.batch_size));
  kv("tgm.enabled", c.tgm_enabled ? "true" : "false");
  kv("lgam.enabled", c.lgam_enabled ? "true" : "false");
  kv("description_mode", to_string(c.description_mode));
  kv("metric.mode", std::string(to_string(c.metric_mode)));
  kv("data.train_count", std::to_string(c.train_count));
  return o;
}

inline uint64_t config_hash(const Config& c) { return fnv1a64(config_text(c)); }

}  // namespace dp
