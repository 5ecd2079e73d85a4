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

#ifndef BELIEFRL_BOUNDS_H_
#define BELIEFRL_BOUNDS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "beliefrl/mdp.h"
#include "beliefrl/preferences.h"
#include "beliefrl/rng.h"

namespace beliefrl {

inline constexpr double kBoundTolerance = 1e-9;
inline constexpr size_t kMaxEnumeratedPairs = 20;
// Margin by which a realizing belief lifts the chosen action above the rest.
inline constexpr double kBeliefMargin = 1e-6;

struct DisagreementEntry {
  size_t state = 0;
  size_t action = 0;
  double magnitude = 0.0;
};

// Agent-labeler disagreement between two Q tables, plus (when produced by a
// verification) the returns it induces and the lower bound on them.
struct DisagreementReport {
  std::vector<DisagreementEntry> per_pair;
  double max_delta = 0.0;
  double bound_value = 0.0;  // j_star - max_delta / (1 - discount)
  double j_star = 0.0;
  double j_delta = 0.0;
  bool holds = true;
  // Pairs whose noiseless label changed, and pairs scored as exact ties,
  // under the perturbed belief.
  size_t flipped_labels = 0;
  size_t tied_labels = 0;
};

// Entrywise |q_a - q_b| for matching row-major tables; per_pair lists the
// nonzero entries. Throws std::invalid_argument on a size mismatch.
DisagreementReport Disagreement(std::span<const double> q_a,
                                std::span<const double> q_b, size_t n_actions);

// Deterministic greedy policy over a belief Q table, lowest index on ties.
Policy PostPolicyFromBelief(std::span<const double> q_belief, size_t n_states,
                            size_t n_actions);

struct BestPostPolicy {
  Policy policy;
  double j_star = 0.0;
  // Q of `policy`, lifted where needed so that its greedy policy is `policy`.
  std::vector<double> belief_q;
  // Winning labeling of the input pairs.
  std::vector<Side> labels;
  size_t consistent_labelings = 0;
};

// Enumerates every labeling of the single-transition pairs. A labeling
// restricts the post-RLHF policy at a state to actions that lose no
// same-state comparison; cyclic labelings are skipped. The best restricted
// policy per labeling is found exactly by policy iteration.
BestPostPolicy FindBestPostPolicy(const TabularMdp& mdp,
                                  std::span<const PreferencePair> pairs);

// Best return over restricted deterministic policies, by brute-force
// enumeration. Test oracle for FindBestPostPolicy; throws if the candidate
// count exceeds max_candidates.
double EnumerateBestPostReturn(const TabularMdp& mdp,
                               std::span<const PreferencePair> pairs,
                               size_t max_candidates = 1'000'000);

struct Perturbation {
  size_t state = 0;
  size_t action = 0;
  double delta = 0.0;  // signed
};

// Applies each perturbation on its own to the ideal belief, rederives the
// post-RLHF policy and checks J_delta >= J_star - |delta| / (1 - discount).
std::vector<DisagreementReport> VerifySingleDisagreements(
    const TabularMdp& mdp, std::span<const PreferencePair> pairs,
    std::span<const double> belief_star,
    std::span<const Perturbation> perturbations);

// Applies all perturbations together and checks
// J_delta >= J_star - max_i |delta_i| / (1 - discount).
DisagreementReport VerifyJointDisagreements(const TabularMdp& mdp,
                                   std::span<const PreferencePair> pairs,
                                   std::span<const double> belief_star,
                                   std::span<const Perturbation> perturbations);

enum class FlipOutcome { kRisk, kSafe, kTie };

struct CaseStudyFlip {
  FlipOutcome preferred = FlipOutcome::kTie;
  // Score of the risky segment minus the safe one under the belief.
  double gap = 0.0;
};

// Labeler believes the agent plays a_lose at s_risk with probability p_lose.
CaseStudyFlip EvaluateCaseStudyFlip(double p_lose, double discount);

const char* FlipOutcomeName(FlipOutcome outcome);

struct RandomMdpOptions {
  size_t min_states = 2;
  size_t max_states = 8;
  size_t min_actions = 2;
  size_t max_actions = 4;
  double min_discount = 0.5;
  double max_discount = 0.95;
  double reward_scale = 1.0;         // rewards uniform in [-scale, scale]
  double terminal_probability = 0.2;
  size_t max_successors = 3;         // nonzero next states per (s, a)
};

TabularMdp RandomMdp(const RandomMdpOptions& options, Rng& rng);

// Random policy with Dirichlet(1)-like rows.
Policy RandomPolicy(size_t n_states, size_t n_actions, Rng& rng);

// Unlabeled single-transition pairs; with probability same_state_fraction
// both transitions depart the same non-terminal state with distinct actions.
std::vector<PreferencePair> RandomSingleTransitionPairs(
    const TabularMdp& mdp, size_t n_pairs, double same_state_fraction,
    Rng& rng);

}  // namespace beliefrl

#endif  // BELIEFRL_BOUNDS_H_
