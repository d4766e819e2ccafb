#include <cmath>

#include <gtest/gtest.h>

#include "dp/bev.hpp"
#include "dp/scenegen.hpp"
#include "dp/tokenizer.hpp"

using dp::BEVGrid;
using dp::Scene;
using dp::Tensor;

namespace {

void randomize(dp::ParamRegistry& reg, uint64_t seed) {
  dp::Rng rng(seed);
  for (auto& [name, t] : reg.items()) {
    Tensor tt = t;
    for (size_t i = 0; i < tt.size(); ++i) tt.data()[i] = 0.2 * rng.normal();
  }
}

double channel_mass(const BEVGrid& g, int c) {
  double m = 0.0;
  for (int iy = 0; iy < g.h; ++iy)
    for (int ix = 0; ix < g.w; ++ix) m += g.at(iy, ix, c);
  return m;
}

Scene two_car_scene() {
  Scene s;
  dp::AgentState a;
  a.id = 1;
  a.pos = {-20.0, -20.0};
  dp::AgentState b;
  b.id = 2;
  b.pos = {20.0, 20.0};
  s.agents = {a, b};
  s.agent_futures = {std::vector<dp::Vec2>(6, a.pos), std::vector<dp::Vec2>(6, b.pos)};
  s.ego_future = std::vector<dp::Vec2>(6, dp::Vec2{0, 0});
  return s;
}

}  // namespace

TEST(Rasterize, EmptySceneIsAllZero) {
  Scene s;
  const BEVGrid g = dp::rasterize(s, 32, 32, 50.0);
  for (double v : g.data) EXPECT_EQ(v, 0.0);
}

TEST(Rasterize, CarPaintsOnlyItsChannel) {
  Scene s;
  dp::AgentState car;
  car.id = 1;
  car.pos = {0.0, 0.0};
  car.length = 4.0;
  car.width = 2.0;
  s.agents.push_back(car);
  const BEVGrid g = dp::rasterize(s, 32, 32, 50.0);
  EXPECT_GT(channel_mass(g, dp::bev_channel(dp::AgentClass::car)), 0.0);
  EXPECT_EQ(channel_mass(g, dp::bev_channel(dp::AgentClass::pedestrian)), 0.0);
  EXPECT_EQ(channel_mass(g, dp::bev_channel(dp::AgentClass::cyclist)), 0.0);
  for (double v : g.data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Rasterize, PaintedMassTracksRectArea) {
  Scene s;
  dp::AgentState car;
  car.id = 1;
  car.pos = {0.0, 0.0};
  car.length = 4.0;
  car.width = 2.0;
  s.agents.push_back(car);
  const BEVGrid g = dp::rasterize(s, 32, 32, 50.0);
  const double cell_area = g.cell_w() * g.cell_h();
  const double expected = 4.0 * 2.0 / cell_area;
  const double mass = channel_mass(g, dp::bev_channel(dp::AgentClass::car));
  EXPECT_GT(mass, 0.5 * expected);
  EXPECT_LT(mass, 1.5 * expected);
}

TEST(Rasterize, PolylineStrokesItsChannel) {
  Scene s;
  dp::MapPolyline pl;
  pl.kind = dp::PolyKind::road_boundary;
  pl.points = {{-40.0, 5.0}, {40.0, 5.0}};
  s.map.push_back(pl);
  const BEVGrid g = dp::rasterize(s, 32, 32, 50.0);
  EXPECT_GT(channel_mass(g, dp::bev_channel(dp::PolyKind::road_boundary)), 10.0);
  EXPECT_EQ(channel_mass(g, dp::bev_channel(dp::PolyKind::lane_divider)), 0.0);
}

TEST(BevEncode, ZeroGridZeroBiasGivesZeroFeatures) {
  dp::ParamRegistry reg;
  auto p = dp::make_bev_encoder(reg, 8);
  dp::Rng rng(3);
  Tensor w = p.w;
  for (size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();  // bias stays zero
  Scene s;
  const BEVGrid g = dp::rasterize(s, 16, 16, 50.0);
  const Tensor f = dp::bev_encode(g, p);
  EXPECT_EQ(f.rows(), 16 * 16);
  EXPECT_EQ(f.cols(), 8);
  for (size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f.data()[i], 0.0);
}

TEST(BevEncode, GradientsMatchFiniteDifferences) {
  dp::ParamRegistry reg;
  auto p = dp::make_bev_encoder(reg, 4);
  dp::GeneratorConfig gcfg;
  const Scene s = dp::generate_scene(3, gcfg);
  const BEVGrid g = dp::rasterize(s, 8, 8, 50.0);
  dp::Rng rng(5);
  const Tensor proj(64, 4, false);
  for (size_t i = 0; i < proj.size(); ++i) proj.data()[i] = rng.normal();
  const double err = dp::grad_check(
      [&](const std::vector<Tensor>& in) {
        dp::BevEncoderParams bp{in[0], in[1]};
        return dp::sum_all(dp::mul(dp::bev_encode(g, bp), proj));
      },
      {p.w, p.b});
  EXPECT_LT(err, 1e-4);
}

TEST(InstanceTokens, EmptySceneFullyMasked) {
  dp::ParamRegistry reg;
  auto bp = dp::make_bev_encoder(reg, 8);
  auto tp = dp::make_tokenizer(reg, 8);
  randomize(reg, 11);
  Scene s;
  const BEVGrid g = dp::rasterize(s, 16, 16, 50.0);
  const auto ts = dp::instance_tokens(dp::bev_encode(g, bp), g, s, tp, 6, 4);
  EXPECT_EQ(ts.valid_agents(), 0);
  EXPECT_EQ(ts.valid_map(), 0);
  ASSERT_TRUE(ts.agents.defined());
  EXPECT_EQ(ts.agents.rows(), 6);
  EXPECT_EQ(ts.agents.cols(), 8);
  for (size_t i = 0; i < ts.agents.size(); ++i) EXPECT_EQ(ts.agents.data()[i], 0.0);
  EXPECT_EQ(ts.ego.rows(), 1);
  EXPECT_EQ(ts.ego.cols(), 8);
}

TEST(InstanceTokens, MaskCountsMatchScene) {
  dp::ParamRegistry reg;
  auto bp = dp::make_bev_encoder(reg, 8);
  auto tp = dp::make_tokenizer(reg, 8);
  randomize(reg, 12);
  dp::GeneratorConfig gcfg;
  for (uint64_t seed = 40; seed < 60; ++seed) {
    const Scene s = dp::generate_scene(seed, gcfg);
    const BEVGrid g = dp::rasterize(s, 16, 16, 50.0);
    const auto ts = dp::tokenize_scene(s, g, bp, tp, gcfg.max_agents, gcfg.max_polylines);
    EXPECT_EQ(ts.valid_agents(), static_cast<int>(s.agents.size()));
    EXPECT_EQ(ts.valid_map(), static_cast<int>(s.map.size()));
    // masked slots are exactly zero
    for (int i = ts.valid_agents(); i < ts.agents.rows(); ++i)
      for (int j = 0; j < ts.agents.cols(); ++j) EXPECT_EQ(ts.agents.at(i, j), 0.0);
  }
}

TEST(InstanceTokens, LazyPathMatchesFullEncodeBitExactly) {
  dp::ParamRegistry reg;
  auto bp = dp::make_bev_encoder(reg, 16);
  auto tp = dp::make_tokenizer(reg, 16);
  randomize(reg, 13);
  dp::GeneratorConfig gcfg;
  for (uint64_t seed = 70; seed < 80; ++seed) {
    const Scene s = dp::generate_scene(seed, gcfg);
    const BEVGrid g = dp::rasterize(s, 32, 32, 50.0);
    const auto full = dp::instance_tokens(dp::bev_encode(g, bp), g, s, tp, 16, 8);
    const auto lazy = dp::tokenize_scene(s, g, bp, tp, 16, 8);
    for (size_t i = 0; i < full.ego.size(); ++i)
      ASSERT_EQ(full.ego.data()[i], lazy.ego.data()[i]);
    for (size_t i = 0; i < full.agents.size(); ++i)
      ASSERT_EQ(full.agents.data()[i], lazy.agents.data()[i]);
    for (size_t i = 0; i < full.map.size(); ++i)
      ASSERT_EQ(full.map.data()[i], lazy.map.data()[i]);
  }
}

TEST(InstanceTokens, MovingOneAgentLeavesOthersBitIdentical) {
  dp::ParamRegistry reg;
  auto bp = dp::make_bev_encoder(reg, 16);
  auto tp = dp::make_tokenizer(reg, 16);
  randomize(reg, 14);
  Scene s0 = two_car_scene();
  Scene s1 = two_car_scene();
  const BEVGrid probe(32, 32, 50.0);
  s1.agents[1].pos.x += probe.cell_w();  // move agent B by exactly one cell

  const BEVGrid g0 = dp::rasterize(s0, 32, 32, 50.0);
  const BEVGrid g1 = dp::rasterize(s1, 32, 32, 50.0);
  const auto t0 = dp::tokenize_scene(s0, g0, bp, tp, 4, 4);
  const auto t1 = dp::tokenize_scene(s1, g1, bp, tp, 4, 4);

  for (size_t i = 0; i < t0.ego.size(); ++i) ASSERT_EQ(t0.ego.data()[i], t1.ego.data()[i]);
  for (int j = 0; j < t0.agents.cols(); ++j) {
    ASSERT_EQ(t0.agents.at(0, j), t1.agents.at(0, j));  // agent A untouched
  }
  bool b_changed = false;
  for (int j = 0; j < t0.agents.cols(); ++j)
    b_changed = b_changed || t0.agents.at(1, j) != t1.agents.at(1, j);
  EXPECT_TRUE(b_changed);
}

TEST(InstanceTokens, EndToEndGradientReachesEncoderWeights) {
  dp::ParamRegistry reg;
  auto bp = dp::make_bev_encoder(reg, 8);
  auto tp = dp::make_tokenizer(reg, 8);
  randomize(reg, 15);
  dp::GeneratorConfig gcfg;
  const Scene s = dp::generate_scene(9, gcfg);
  const BEVGrid g = dp::rasterize(s, 8, 8, 50.0);
  const double err = dp::grad_check(
      [&](const std::vector<Tensor>& in) {
        dp::BevEncoderParams b2{in[0], in[1]};
        const auto ts = dp::tokenize_scene(s, g, b2, tp, 16, 8);
        return dp::sum_all(dp::mul(ts.agents, ts.agents));
      },
      {bp.w, bp.b});
  EXPECT_LT(err, 1e-4);
}
