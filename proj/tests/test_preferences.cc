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

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "beliefrl/bounds.h"
#include "beliefrl/mdp.h"
#include "beliefrl/preferences.h"
#include "beliefrl/solvers.h"
#include "doctest.h"

namespace beliefrl {
namespace {

constexpr double kLogistic1 = 0.7310585786300049;  // 1 / (1 + e^-1)

TEST_CASE("segment advantage score") {
  const ValueTables t = MakeTables(3, 2, {0, 0, 0, 0, 0, 0}, {0, 0, 0});
  ValueTables custom = t;
  custom.adv = {2.0, 0.0, -4.0, 0.0, 0.0, 0.0};
  const Segment two{{{0, 0, 1}, {1, 0, 2}}};
  CHECK(SegmentAdvScore(two, custom, 0.5) == 0.0);
  const Segment one{{{1, 0, 2}}};
  CHECK(SegmentAdvScore(one, custom, 0.5) == -4.0);

  const TabularMdp mdp = BuildGridworld(0.7);
  const ValueTables opt = ValueIteration(mdp);
  const Policy greedy = GreedyPolicy(opt);
  Rng rng(1);
  const Segment path = Rollout(mdp, greedy, 50, rng);
  CHECK(std::abs(SegmentAdvScore(path, opt, 0.7)) < 1e-9);
}

TEST_CASE("preference probability") {
  CHECK(PreferenceProbability(1.0, 1.0, 10.0) == 0.5);
  CHECK(PreferenceProbability(0.1, 0.0, 10.0) == doctest::Approx(kLogistic1).epsilon(1e-12));
  CHECK(PreferenceProbability(2.0, 1.0, kNoiseless) == 1.0);
  CHECK(PreferenceProbability(1.0, 2.0, kNoiseless) == 0.0);
  CHECK(PreferenceProbability(1.0, 1.0, kNoiseless) == 0.5);
  CHECK(PreferenceProbability(1e6, -1e6, 10.0) == 1.0);
  CHECK(PreferenceProbability(-1e6, 1e6, 10.0) == 0.0);
  CHECK_THROWS_AS(PreferenceProbability(0.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("belief model on the case study") {
  using namespace case_study;
  const TabularMdp mdp = BuildCaseStudy(0.9);
  const ValueTables opt = ValueIteration(mdp);
  const Segment risky{{{kStart, kRisk, kRiskState}}};
  const Segment safe{{{kStart, kSafe, kSafeState}}};
  CHECK(PrefProbBelief(risky, safe, opt, 0.9, kNoiseless) == 1.0);
  CHECK(PrefProbRegret(risky, safe, opt, 0.9, 3.0) ==
        PrefProbBelief(risky, safe, opt, 0.9, 3.0));
  CHECK(std::abs(opt.A(kStart, kRisk)) < 1e-12);
  CHECK(std::abs(opt.A(kStart, kSafe) + 9.0) < 1e-12);

  const Segment win{{{kRiskState, kWin, kWinState}}};
  CHECK(PrefProbBelief(risky, win, opt, 0.9, 10.0) == 0.5);

  const Segment longer{{{kStart, kSafe, kSafeState}, {kSafeState, 0, kNeutral}}};
  CHECK_THROWS_AS(PrefProbBelief(risky, longer, opt, 0.9, 1.0), std::invalid_argument);
}

TEST_CASE("partial return model") {
  using namespace case_study;
  const TabularMdp mdp = BuildCaseStudy(0.9);
  const Segment win{{{kRiskState, kWin, kWinState}}};
  const Segment lose{{{kRiskState, kLose, kLoseState}}};
  CHECK(PrefProbPartialReturn(win, win, mdp, 1.0) == 0.5);
  CHECK(PrefProbPartialReturn(win, lose, mdp, 0.0) == 0.5);
  // Returns 10 and -10 scaled to a gap of 1.
  CHECK(PrefProbPartialReturn(win, lose, mdp, 0.05) ==
        doctest::Approx(kLogistic1).epsilon(1e-12));
}

TEST_CASE("model complementarity and monotonicity") {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const TabularMdp mdp = RandomMdp(RandomMdpOptions{}, rng);
    const ValueTables belief = PolicyEvaluation(
        mdp, RandomPolicy(mdp.n_states(), mdp.n_actions(), rng));
    const auto pairs = RandomSingleTransitionPairs(mdp, 5, 0.5, rng);
    for (const auto& p : pairs) {
      const double disc = mdp.discount();
      CHECK(std::abs(PrefProbBelief(p.first, p.second, belief, disc, 2.0) +
                     PrefProbBelief(p.second, p.first, belief, disc, 2.0) - 1.0) < 1e-12);
      CHECK(std::abs(PrefProbPartialReturn(p.first, p.second, mdp, 2.0) +
                     PrefProbPartialReturn(p.second, p.first, mdp, 2.0) - 1.0) < 1e-12);
      const double lo = PrefProbBelief(p.first, p.second, belief, disc, 1.0);
      const double hi = PrefProbBelief(p.first, p.second, belief, disc, 4.0);
      CHECK(std::abs(hi - 0.5) >= std::abs(lo - 0.5));
    }
  }
}

TEST_CASE("same-state pairs ignore a per-state shift of the advantages") {
  ValueTables t = MakeTables(2, 3, {1.0, 2.0, 3.0, 0.0, 0.0, 0.0}, {3.0, 0.0});
  const Segment a{{{0, 0, 1}}};
  const Segment b{{{0, 2, 1}}};
  const double before = PrefProbBelief(a, b, t, 0.9, 1.5);
  for (size_t k = 0; k < 3; ++k) t.adv[k] += 7.25;
  CHECK(PrefProbBelief(a, b, t, 0.9, 1.5) == doctest::Approx(before).epsilon(1e-14));
}

TEST_CASE("label sampling") {
  Rng rng(3);
  CHECK(SampleLabel(1.0, false, rng) == Side::kFirst);
  CHECK(SampleLabel(0.0, false, rng) == Side::kSecond);
  CHECK(SampleLabel(0.5, true, rng) == Side::kFirst);
  CHECK(SampleLabel(0.2, true, rng) == Side::kSecond);

  // Binomial oracle: 1e5 draws at p = 0.73 land within 3 sigma.
  const int n = 100000;
  int firsts = 0;
  for (int i = 0; i < n; ++i) firsts += SampleLabel(0.73, false, rng) == Side::kFirst;
  const double sigma = std::sqrt(n * 0.73 * 0.27);
  CHECK(std::abs(firsts - n * 0.73) < 3.0 * sigma);
}

TEST_CASE("dataset generation") {
  const TabularMdp mdp = BuildGridworld(0.7);
  const Policy uniform = Policy::Uniform(49, 4);
  DatasetOptions opt;
  const auto a = GenerateDataset(mdp, uniform, BeliefSpec::EpsGreedyClass(0.1), opt, 77, "gridworld");
  const auto b = GenerateDataset(mdp, uniform, BeliefSpec::EpsGreedyClass(0.1), opt, 77, "gridworld");
  REQUIRE(a.pairs.size() == opt.n_pairs);
  std::ostringstream sa, sb;
  WriteDatasetJsonl(a, sa);
  WriteDatasetJsonl(b, sb);
  CHECK(sa.str() == sb.str());
  for (const auto& p : a.pairs) {
    CHECK(p.first.size() == 1);
    CHECK(p.second.size() == 1);
    CHECK(p.label_prob >= 0.0);
    CHECK(p.label_prob <= 1.0);
  }

  std::istringstream in(sa.str());
  const PreferenceDataset back = ReadDatasetJsonl(in);
  CHECK(back.pairs.size() == a.pairs.size());
  CHECK(back.seed == 77);
  CHECK(back.mdp_ref == "gridworld");
  std::ostringstream again;
  WriteDatasetJsonl(back, again);
  CHECK(again.str() == sa.str());

  opt.n_pairs = 0;
  const auto empty = GenerateDataset(mdp, uniform, BeliefSpec::Optimal(), opt, 1);
  CHECK(empty.pairs.empty());
  std::ostringstream se;
  WriteDatasetJsonl(empty, se);
  CHECK(se.str().find("\"header\"") != std::string::npos);
}

TEST_CASE("optimal noiseless labels follow the regret ordering") {
  const TabularMdp mdp = BuildGridworld(0.7);
  const ValueTables opt = ValueIteration(mdp);
  DatasetOptions opt_labels;
  opt_labels.alpha = kNoiseless;
  opt_labels.segment_len = 3;
  const auto ds = GenerateDataset(mdp, Policy::Uniform(49, 4),
                                  BeliefSpec::Optimal(), opt_labels, 5);
  for (const auto& p : ds.pairs) {
    const double gap = SegmentAdvScore(p.first, opt, 0.7) - SegmentAdvScore(p.second, opt, 0.7);
    CHECK(p.label == (gap >= 0.0 ? Side::kFirst : Side::kSecond));
  }
}

TEST_CASE("dataset errors") {
  using namespace case_study;
  const TabularMdp mdp = BuildCaseStudy(0.9);
  DatasetOptions opt;
  opt.cap = 2;
  opt.segment_len = 5;
  CHECK_THROWS_AS(GenerateDataset(mdp, Policy::Uniform(6, 2), BeliefSpec::Optimal(), opt, 1),
                  std::invalid_argument);
  opt.segment_len = 1;
  opt.n_trajectories = 1;
  CHECK_THROWS_AS(GenerateDataset(mdp, Policy::Uniform(6, 2), BeliefSpec::Optimal(), opt, 1),
                  std::invalid_argument);
}

TEST_CASE("belief specs") {
  const TabularMdp mdp = BuildCaseStudy(0.9);
  const ValueTables opt = BeliefTables(mdp, BeliefSpec::Optimal());
  CHECK(opt.q == ValueIteration(mdp).q);
  const ValueTables eps = BeliefTables(mdp, BeliefSpec::EpsGreedyClass(0.4));
  CHECK(eps.q == EpsGreedyValueIteration(mdp, 0.4).q);
  const ValueTables table = BeliefTables(mdp, BeliefSpec::ExplicitTable(opt.q));
  for (size_t s = 0; s < 6; ++s) CHECK(table.v[s] == opt.v[s]);
  const Policy uniform = Policy::Uniform(6, 2);
  CHECK(BeliefTables(mdp, BeliefSpec::PolicyDerived(uniform)).q ==
        PolicyEvaluation(mdp, uniform).q);
  CHECK_THROWS(BeliefTables(mdp, BeliefSpec::ExplicitTable({1.0, 2.0})));

  for (const BeliefSpec& b : {BeliefSpec::Optimal(), BeliefSpec::EpsGreedyClass(0.3),
                              BeliefSpec::ExplicitTable(opt.q),
                              BeliefSpec::PolicyDerived(uniform)}) {
    CHECK(BeliefSpecToJson(BeliefSpecFromJson(BeliefSpecToJson(b))) == BeliefSpecToJson(b));
  }
  CHECK(AlphaFromJson(AlphaToJson(kNoiseless)) == kNoiseless);
  CHECK(AlphaFromJson(AlphaToJson(2.5)) == 2.5);
}

}  // namespace
}  // namespace beliefrl
