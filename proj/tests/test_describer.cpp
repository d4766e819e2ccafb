#include <algorithm>
#include <array>
#include <vector>

#include <gtest/gtest.h>

#include "dp/describer.hpp"
#include "dp/scenegen.hpp"

using dp::AgentState;
using dp::Description;
using dp::Scene;
using dp::Vec2;
namespace tok = dp::tok;

namespace {

Scene ego_straight_scene(double speed) {
  Scene s;
  s.ego.id = 0;
  s.ego.cls = dp::AgentClass::car;
  s.ego.speed = speed;
  AgentState probe;
  probe.speed = speed;
  s.ego_future = dp::rollout_ct(probe, 0.5, 6);
  return s;
}

void add_agent(Scene& s, AgentState a) {
  a.id = static_cast<int>(s.agents.size()) + 1;
  s.agents.push_back(a);
  s.agent_futures.push_back(dp::rollout_ct(a, 0.5, 6));
}

std::vector<std::array<int, 4>> clauses_of(const Description& d) {
  std::vector<std::array<int, 4>> out;
  if (d.size() <= 3) return out;
  for (size_t i = 1; i + 4 < d.size() + 1 && d[i] != tok::EOS; i += 5)
    out.push_back({d[i], d[i + 1], d[i + 2], d[i + 3]});
  return out;
}

}  // namespace

TEST(Describer, EmptySceneIsNone) {
  const Scene s = ego_straight_scene(5.0);
  const Description expect{tok::BOS, tok::NONE, tok::EOS};
  EXPECT_EQ(dp::attention_description(s), expect);
  EXPECT_EQ(dp::global_description(s), expect);
}

TEST(Describer, ApproachingCarAhead) {
  Scene s = ego_straight_scene(5.0);
  AgentState car;
  car.cls = dp::AgentClass::car;
  car.pos = {8.0, 0.0};
  car.heading = 3.141592653589793;
  car.speed = 2.0;
  add_agent(s, car);
  const Description expect{tok::BOS, tok::CAR, tok::AHEAD, tok::NEAR, tok::APPROACHING, tok::EOS};
  EXPECT_EQ(dp::attention_description(s), expect);
}

TEST(Describer, RecedingFarCarIsExcluded) {
  Scene s = ego_straight_scene(5.0);
  AgentState car;
  car.cls = dp::AgentClass::car;
  car.pos = {-50.0, 0.0};
  car.heading = 3.141592653589793;  // moving away in -x
  car.speed = 10.0;
  add_agent(s, car);
  const Description expect{tok::BOS, tok::NONE, tok::EOS};
  EXPECT_EQ(dp::attention_description(s), expect);
}

TEST(Describer, CrossingPedestrianToken) {
  Scene s = ego_straight_scene(4.0);
  AgentState ped;
  ped.cls = dp::AgentClass::pedestrian;
  ped.pos = {6.0, 6.0};
  ped.heading = -1.5707963267948966;  // walking toward the road
  ped.speed = 2.0;
  ped.length = 0.6;
  ped.width = 0.6;
  add_agent(s, ped);
  const auto d = dp::attention_description(s);
  const auto cl = clauses_of(d);
  ASSERT_EQ(cl.size(), 1u);
  EXPECT_EQ(cl[0][0], tok::PED);
  EXPECT_EQ(cl[0][3], tok::CROSSING);
}

TEST(Describer, GlobalIncludesNearButIrrelevantAgents) {
  Scene s = ego_straight_scene(5.0);
  AgentState threat;
  threat.cls = dp::AgentClass::car;
  threat.pos = {8.0, 0.0};
  threat.heading = 3.141592653589793;
  threat.speed = 2.0;
  add_agent(s, threat);
  AgentState parked;  // near in the global sense, never enters the corridor
  parked.cls = dp::AgentClass::car;
  parked.pos = {0.0, 20.0};
  parked.speed = 0.0;
  add_agent(s, parked);

  EXPECT_EQ(clauses_of(dp::attention_description(s)).size(), 1u);
  EXPECT_EQ(clauses_of(dp::global_description(s)).size(), 2u);
}

TEST(Describer, GrammarDeterminismAndLengthBounds) {
  dp::GeneratorConfig cfg;
  for (uint64_t seed = 0; seed < 150; ++seed) {
    const Scene s = dp::generate_scene(seed, cfg);
    const Description ald = dp::attention_description(s);
    const Description gld = dp::global_description(s);
    EXPECT_TRUE(dp::description_valid(ald)) << dp::description_text(ald);
    EXPECT_TRUE(dp::description_valid(gld)) << dp::description_text(gld);
    EXPECT_EQ(ald, dp::attention_description(s));
    EXPECT_EQ(gld, dp::global_description(s));
    EXPECT_LE(clauses_of(ald).size(), 4u);
    EXPECT_LE(clauses_of(gld).size(), 4u);
    EXPECT_LE(ald.size(), static_cast<size_t>(dp::kMaxDescLen));
    EXPECT_LE(gld.size(), static_cast<size_t>(dp::kMaxDescLen));
  }
}

// Independent restatement of the relevance rule, used to gate the containment
// property below.
namespace {

bool oracle_relevant(const Scene& s, const AgentState& a) {
  if (a.pos.norm() < 5.0) return true;
  const Vec2 vel = a.velocity();
  for (int k = 1; k <= 6; ++k) {
    const double t = 0.5 * k;
    const Vec2 p{a.pos.x + vel.x * t, a.pos.y + vel.y * t};
    if (dp::distance(p, s.ego_future[k - 1]) < 3.5) return true;
  }
  return false;
}

}  // namespace

TEST(Describer, GlobalContainsAttentionClauses) {
  dp::GeneratorConfig cfg;
  cfg.max_agents = 4;  // both modes fit every candidate, no truncation
  int checked = 0;
  for (uint64_t seed = 0; seed < 800; ++seed) {
    const Scene s = dp::generate_scene(seed, cfg);
    bool all_relevant_near = true;
    for (const auto& a : s.agents)
      if (oracle_relevant(s, a) && a.pos.norm() >= 30.0) all_relevant_near = false;
    if (!all_relevant_near) continue;
    auto ald = clauses_of(dp::attention_description(s));
    auto gld = clauses_of(dp::global_description(s));
    if (!ald.empty()) ++checked;
    std::sort(ald.begin(), ald.end());
    std::sort(gld.begin(), gld.end());
    EXPECT_TRUE(std::includes(gld.begin(), gld.end(), ald.begin(), ald.end()))
        << "seed " << seed;
  }
  EXPECT_GE(checked, 50);
}
