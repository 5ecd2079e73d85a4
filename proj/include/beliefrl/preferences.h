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

#ifndef BELIEFRL_PREFERENCES_H_
#define BELIEFRL_PREFERENCES_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "beliefrl/mdp.h"
#include "beliefrl/rng.h"
#include "beliefrl/solvers.h"
#include "json.hpp"

namespace beliefrl {

// Inverse temperature meaning "noiseless" (alpha -> infinity).
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

enum class Side { kFirst = 0, kSecond = 1 };

struct PreferencePair {
  Segment first;
  Segment second;
  Side label = Side::kFirst;
  // Model probability that `first` is preferred.
  double label_prob = 0.5;

  const Segment& preferred() const {
    return label == Side::kFirst ? first : second;
  }
  const Segment& rejected() const {
    return label == Side::kFirst ? second : first;
  }
};

// Which capability belief a labeler uses to score segments.
struct BeliefSpec {
  enum class Kind { kOptimal, kEpsGreedyClass, kExplicitTable, kPolicyDerived };

  Kind kind = Kind::kOptimal;
  double eps = 0.0;                 // kEpsGreedyClass
  std::vector<double> q_table;      // kExplicitTable, row-major (s, a)
  std::optional<Policy> policy;     // kPolicyDerived

  static BeliefSpec Optimal() { return {}; }
  static BeliefSpec EpsGreedyClass(double eps);
  static BeliefSpec ExplicitTable(std::vector<double> q_table);
  static BeliefSpec PolicyDerived(Policy policy);
};

// Q/V/advantage tables the belief induces on `mdp`. An explicit Q table is
// paired with its greedy state values.
ValueTables BeliefTables(const TabularMdp& mdp, const BeliefSpec& belief,
                         double tol = kDefaultTol);

// sum_t discount^t adv(s_t, a_t), with t = 0 at the segment's first transition.
double SegmentAdvScore(const Segment& segment, const ValueTables& tables,
                       double discount);

// sum_t discount^t r(s_t, a_t, s_{t+1}).
double SegmentReturn(const Segment& segment, const TabularMdp& mdp);

// Logistic of alpha * (score_a - score_b); alpha = kNoiseless gives a step
// function with value 0.5 at an exact tie.
double PreferenceProbability(double score_a, double score_b, double alpha);

// Belief-based model: advantage scores under the labeler's belief.
double PrefProbBelief(const Segment& seg_a, const Segment& seg_b,
                      const ValueTables& belief, double discount, double alpha);
// Regret model: the belief model evaluated with optimal tables.
double PrefProbRegret(const Segment& seg_a, const Segment& seg_b,
                      const ValueTables& optimal, double discount,
                      double alpha);
double PrefProbPartialReturn(const Segment& seg_a, const Segment& seg_b,
                             const TabularMdp& mdp, double alpha);

// Finite mode draws Bernoulli(prob). Noiseless mode is deterministic and
// resolves prob == 0.5 to the first segment.
Side SampleLabel(double prob, bool noiseless, Rng& rng);

struct DatasetOptions {
  size_t n_trajectories = 100;
  size_t segment_len = 1;
  size_t n_pairs = 500;
  double alpha = 10.0;
  size_t cap = 1000;
  double tol = kDefaultTol;
};

struct PreferenceDataset {
  std::vector<PreferencePair> pairs;
  BeliefSpec belief;
  DatasetOptions options;
  uint64_t seed = 0;
  std::string mdp_ref;
};

// Rolls out trajectories under `behavior`, samples equal-length windows and
// pairs them without replacement (reshuffling once a round is exhausted),
// then labels every pair with the belief-based model.
PreferenceDataset GenerateDataset(const TabularMdp& mdp, const Policy& behavior,
                                  const BeliefSpec& belief,
                                  const DatasetOptions& options, uint64_t seed,
                                  std::string mdp_ref = "");

nlohmann::json BeliefSpecToJson(const BeliefSpec& belief);
BeliefSpec BeliefSpecFromJson(const nlohmann::json& j);

// JSON lines: one header object, then one object per pair.
void WriteDatasetJsonl(const PreferenceDataset& dataset, std::ostream& out);
PreferenceDataset ReadDatasetJsonl(std::istream& in);

nlohmann::json AlphaToJson(double alpha);
double AlphaFromJson(const nlohmann::json& j);

}  // namespace beliefrl

#endif  // BELIEFRL_PREFERENCES_H_
