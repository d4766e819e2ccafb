#pragma once

#include <string>
#include <vector>

#include "dp/describer.hpp"
#include "dp/metrics.hpp"
#include "dp/scene.hpp"
#include "dp/vocab.hpp"

namespace dp {

// Top-down BEV rendering: map polylines, agent boxes, dashed GT futures, the
// planned trajectory when given, and the attention description as a caption.
// Output is deterministic byte-for-byte for identical inputs.

namespace render_detail {

inline constexpr double kCanvas = 640.0;
inline constexpr double kCaption = 60.0;

struct Mapper {
  double extent;
  double sx(double x) const { return (x + extent) / (2.0 * extent) * kCanvas; }
  double sy(double y) const { return kCanvas - (y + extent) / (2.0 * extent) * kCanvas; }
};

inline std::string pt(const Mapper& m, const Vec2& p) {
  return fmt_fixed(m.sx(p.x), 2) + "," + fmt_fixed(m.sy(p.y), 2);
}

inline std::string polyline_svg(const Mapper& m, const std::vector<Vec2>& pts,
                                const std::string& style) {
  std::string s = "  <polyline fill=\"none\" " + style + " points=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += pt(m, pts[i]);
  }
  s += "\"/>\n";
  return s;
}

inline std::string rect_svg(const Mapper& m, const OrientedRect& r, const std::string& style) {
  const auto c = r.corners();
  std::string s = "  <polygon " + style + " points=\"";
  for (int i = 0; i < 4; ++i) {
    if (i) s += ' ';
    s += pt(m, c[i]);
  }
  s += "\"/>\n";
  return s;
}

inline const char* agent_fill(AgentClass c) {
  switch (c) {
    case AgentClass::car: return "#4682b4";
    case AgentClass::pedestrian: return "#d9534f";
    default: return "#2e8b57";
  }
}

inline const char* map_style(PolyKind k) {
  switch (k) {
    case PolyKind::lane_divider:
      return "stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"6,4\"";
    case PolyKind::road_boundary: return "stroke=\"#333333\" stroke-width=\"2\"";
    default: return "stroke=\"#dd8800\" stroke-width=\"2\"";
  }
}

}  // namespace render_detail

inline Description scene_ald_for_render(const Scene& scene) {
  return scene.ald_tokens.empty() ? attention_description(scene) : scene.ald_tokens;
}

inline std::string render_scene_svg(const Scene& scene, double extent,
                                    const PlanningResult* plan) {
  using namespace render_detail;
  const Mapper m{extent};
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_fixed(kCanvas, 0) +
       "\" height=\"" + fmt_fixed(kCanvas + kCaption, 0) + "\" viewBox=\"0 0 " +
       fmt_fixed(kCanvas, 0) + " " + fmt_fixed(kCanvas + kCaption, 0) + "\">\n";
  s += "  <rect x=\"0\" y=\"0\" width=\"" + fmt_fixed(kCanvas, 0) + "\" height=\"" +
       fmt_fixed(kCanvas, 0) + "\" fill=\"#f7f7f4\"/>\n";

  for (const auto& pl : scene.map) s += polyline_svg(m, pl.points, map_style(pl.kind));

  for (size_t i = 0; i < scene.agents.size(); ++i) {
    const auto& a = scene.agents[i];
    std::vector<Vec2> fut = scene.agent_futures[i];
    fut.insert(fut.begin(), a.pos);
    s += polyline_svg(m, fut,
                      std::string("stroke=\"") + agent_fill(a.cls) +
                          "\" stroke-width=\"1\" stroke-dasharray=\"3,3\" opacity=\"0.7\"");
    s += rect_svg(m, OrientedRect{a.pos, a.heading, a.length, a.width},
                  std::string("fill=\"") + agent_fill(a.cls) + "\" opacity=\"0.85\"");
  }

  std::vector<Vec2> ego_fut = scene.ego_future;
  ego_fut.insert(ego_fut.begin(), scene.ego.pos);
  s += polyline_svg(m, ego_fut,
                    "stroke=\"#44aa44\" stroke-width=\"1.5\" stroke-dasharray=\"4,3\"");
  s += rect_svg(m, OrientedRect{scene.ego.pos, scene.ego.heading, scene.ego.length,
                                scene.ego.width},
                "fill=\"none\" stroke=\"#111111\" stroke-width=\"2\"");

  if (plan) {
    std::vector<Vec2> pw(plan->waypoints.begin(), plan->waypoints.end());
    pw.insert(pw.begin(), Vec2{0.0, 0.0});
    s += polyline_svg(m, pw, "stroke=\"#2222cc\" stroke-width=\"2.5\"");
    for (const auto& p : plan->waypoints)
      s += "  <circle cx=\"" + fmt_fixed(m.sx(p.x), 2) + "\" cy=\"" + fmt_fixed(m.sy(p.y), 2) +
           "\" r=\"3\" fill=\"#2222cc\"/>\n";
  }

  const Description ald = scene_ald_for_render(scene);
  s += "  <rect x=\"0\" y=\"" + fmt_fixed(kCanvas, 0) + "\" width=\"" + fmt_fixed(kCanvas, 0) +
       "\" height=\"" + fmt_fixed(kCaption, 0) + "\" fill=\"#222222\"/>\n";
  s += "  <text x=\"10\" y=\"" + fmt_fixed(kCanvas + 25.0, 0) +
       "\" font-family=\"monospace\" font-size=\"13\" fill=\"#eeeeee\">command: " +
       to_string(scene.command) + "</text>\n";
  s += "  <text x=\"10\" y=\"" + fmt_fixed(kCanvas + 45.0, 0) +
       "\" font-family=\"monospace\" font-size=\"13\" fill=\"#9fd89f\">attention: " +
       description_text(ald) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace dp
