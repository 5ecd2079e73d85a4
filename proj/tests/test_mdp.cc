// Copyright 2026 The beliefrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <stdexcept>
#include <vector>

#include "beliefrl/mdp.h"
#include "beliefrl/rng.h"
#include "doctest.h"

namespace beliefrl {
namespace {

size_t Next(const TabularMdp& mdp, size_t s, size_t a) {
  for (size_t n = 0; n < mdp.n_states(); ++n) {
    if (mdp.P(s, a, n) == 1.0) return n;
  }
  FAIL("transition is not deterministic");
  return 0;
}

TEST_CASE("gridworld terminal rewards") {
  const TabularMdp mdp = BuildGridworld(0.7);
  CHECK(mdp.n_states() == 49);
  CHECK(mdp.n_actions() == 4);
  const size_t above_goal = GridState({1, 6});
  CHECK(Next(mdp, above_goal, kUp) == GridState(kGridGoal));
  CHECK(mdp.R(above_goal, kUp, GridState(kGridGoal)) == 200.0);
  const size_t beside_cliff = GridState({3, 5});
  CHECK(mdp.R(beside_cliff, kRight, GridState({3, 6})) == -200.0);
  const size_t below_cliff = GridState({5, 6});
  CHECK(mdp.R(below_cliff, kUp, GridState({4, 6})) == -200.0);
  for (GridCoord c : {kGridGoal, kGridCliffs[0], kGridCliffs[1]}) {
    CHECK(mdp.IsTerminal(GridState(c)));
  }
  CHECK(mdp.start_dist()[GridState(kGridStart)] == 1.0);
}

TEST_CASE("gridworld off-grid move stays put with extra penalty") {
  const TabularMdp mdp = BuildGridworld(0.7);
  const size_t start = GridState(kGridStart);
  CHECK(Next(mdp, start, kRight) == start);
  CHECK(mdp.R(start, kRight, start) == -2.0);
  CHECK(Next(mdp, start, kDown) == start);
}

TEST_CASE("gridworld interior move costs one") {
  const TabularMdp mdp = BuildGridworld(0.7);
  const size_t s = GridState({3, 3});
  CHECK(Next(mdp, s, kLeft) == GridState({3, 2}));
  CHECK(mdp.R(s, kLeft, GridState({3, 2})) == -1.0);
  CHECK(Next(mdp, s, kUp) == GridState({2, 3}));
}

TEST_CASE("case study dynamics") {
  using namespace case_study;
  const TabularMdp mdp = BuildCaseStudy(0.9);
  CHECK(Next(mdp, kStart, kRisk) == kRiskState);
  CHECK(mdp.R(kStart, kRisk, kRiskState) == 0.0);
  CHECK(Next(mdp, kRiskState, kWin) == kWinState);
  CHECK(mdp.R(kRiskState, kWin, kWinState) == 10.0);
  CHECK(mdp.R(kRiskState, kLose, kLoseState) == -10.0);
  for (size_t a = 0; a < mdp.n_actions(); ++a) {
    CHECK(Next(mdp, kWinState, a) == kWinState);
    CHECK(mdp.R(kWinState, a, kWinState) == 0.0);
  }
  CHECK(mdp.IsTerminal(kNeutral));
  CHECK_FALSE(mdp.IsTerminal(kRiskState));
}

TEST_CASE("constructor rejects invalid tensors") {
  // Row that does not sum to one.
  CHECK_THROWS_AS(TabularMdp(1, 1, {0.5}, {0.0}, 0.9, {1.0}, {false}),
                  std::invalid_argument);
  // Terminal state that leaks probability.
  CHECK_THROWS_AS(
      TabularMdp(2, 1, {0.0, 1.0, 1.0, 0.0}, {0, 0, 0, 0}, 0.9, {1.0, 0.0},
                 {false, true}),
      std::invalid_argument);
  // Discount outside [0, 1).
  CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, {0.0}, 1.0, {1.0}, {false}),
                  std::invalid_argument);
  // Start distribution not normalized.
  CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, {0.0}, 0.5, {0.5}, {false}),
                  std::invalid_argument);
}

TEST_CASE("rollout under the safe policy") {
  using namespace case_study;
  const TabularMdp mdp = BuildCaseStudy(0.9);
  const std::vector<size_t> actions(mdp.n_states(), kSafe);
  Rng rng(3);
  const Segment seg = Rollout(mdp, Policy::Deterministic(actions, 2), 10, rng);
  REQUIRE(seg.size() == 2);
  CHECK(seg[0] == Transition{kStart, kSafe, kSafeState});
  CHECK(seg[1] == Transition{kSafeState, kProceed, kNeutral});
}

TEST_CASE("rollout cap binds and rollouts are reproducible") {
  const TabularMdp mdp = BuildGridworld(0.7);
  const Policy uniform = Policy::Uniform(49, 4);
  Rng rng(11);
  CHECK(Rollout(mdp, uniform, 1, rng).size() == 1);
  Rng a(5), b(5);
  const Segment first = Rollout(mdp, uniform, 1000, a);
  const Segment second = Rollout(mdp, uniform, 1000, b);
  CHECK(first == second);
  CHECK_NOTHROW(ValidateSegment(first));
}

TEST_CASE("segment validation") {
  CHECK_THROWS_AS(ValidateSegment(Segment{}), std::invalid_argument);
  const Segment broken{{{0, 0, 1}, {2, 0, 3}}};
  CHECK_THROWS_AS(ValidateSegment(broken), std::invalid_argument);
}

TEST_CASE("json round trips") {
  const TabularMdp mdp = BuildCaseStudy(0.8);
  const auto j = MdpToJson(mdp);
  for (const char* key : {"n_states", "n_actions", "transition", "reward",
                          "discount", "start_dist", "terminal"}) {
    CHECK(j.contains(key));
  }
  const TabularMdp back = MdpFromJson(j);
  CHECK(MdpToJson(back) == j);

  const Policy pi(2, 2, {0.25, 0.75, 1.0, 0.0});
  CHECK(PolicyFromJson(PolicyToJson(pi)) == pi);
  const Segment seg{{{0, 1, 2}, {2, 0, 3}}};
  CHECK(SegmentFromJson(SegmentToJson(seg)) == seg);
}

TEST_CASE("rng helpers are deterministic and in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.Uniform();
    CHECK(u == b.Uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const size_t k = a.UniformInt(7);
    CHECK(k == b.UniformInt(7));
    CHECK(k < 7);
  }
  CHECK(DeriveSeed(1, 2, 3) != DeriveSeed(1, 3, 2));
  CHECK(DeriveSeed(1, 2, 3) == DeriveSeed(1, 2, 3));
}

}  // namespace
}  // namespace beliefrl
