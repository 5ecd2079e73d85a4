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

#include "beliefrl/bounds.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "beliefrl/solvers.h"

namespace beliefrl {
namespace {

using ActionMask = uint32_t;
constexpr double kImprovementThreshold = 1e-12;

bool SameStateConstraint(const PreferencePair& pair) {
  return pair.first[0].state == pair.second[0].state &&
         pair.first[0].action != pair.second[0].action;
}

void CheckSingleTransition(std::span<const PreferencePair> pairs,
                           const TabularMdp& mdp) {
  if (pairs.size() > kMaxEnumeratedPairs) {
    throw std::invalid_argument(
        "best post policy: " + std::to_string(pairs.size()) +
        " pairs exceed the enumeration cap of " +
        std::to_string(kMaxEnumeratedPairs));
  }
  if (mdp.n_actions() > 32) {
    throw std::invalid_argument("best post policy: at most 32 actions");
  }
  for (const PreferencePair& p : pairs) {
    if (p.first.size() != 1 || p.second.size() != 1) {
      throw std::invalid_argument("best post policy: pairs must be single-transition");
    }
    for (const Transition& t : {p.first[0], p.second[0]}) {
      if (t.state >= mdp.n_states() || t.action >= mdp.n_actions()) {
        throw std::invalid_argument("best post policy: pair indexes outside the mdp");
      }
    }
  }
}

// Allowed actions per state under a labeling (bit i set: pair i prefers its
// second segment). Empty result means the labeling is cyclic at some state.
std::vector<ActionMask> AllowedActions(const TabularMdp& mdp,
                                       std::span<const PreferencePair> pairs,
                                       uint64_t labeling) {
  const size_t ns = mdp.n_states();
  const size_t na = mdp.n_actions();
  const ActionMask all = na == 32 ? ~ActionMask{0} : (ActionMask{1} << na) - 1;
  // beaten_by[s][loser] = mask of winners over `loser` at s.
  std::map<size_t, std::vector<ActionMask>> beaten_by;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!SameStateConstraint(pairs[i])) continue;
    const bool second_wins = (labeling >> i) & 1;
    const Transition& win = second_wins ? pairs[i].second[0] : pairs[i].first[0];
    const Transition& lose = second_wins ? pairs[i].first[0] : pairs[i].second[0];
    auto& edges = beaten_by[win.state];
    if (edges.empty()) edges.assign(na, 0);
    edges[lose.action] |= ActionMask{1} << win.action;
  }
  std::vector<ActionMask> allowed(ns, all);
  for (const auto& [s, edges] : beaten_by) {
    // Peel off unbeaten actions; anything left over sits on a cycle.
    ActionMask remaining = all;
    bool progress = true;
    while (remaining != 0 && progress) {
      progress = false;
      for (size_t a = 0; a < na; ++a) {
        const ActionMask bit = ActionMask{1} << a;
        if ((remaining & bit) && (edges[a] & remaining) == 0) {
          remaining &= ~bit;
          progress = true;
        }
      }
    }
    if (remaining != 0) return {};
    ActionMask unbeaten = 0;
    for (size_t a = 0; a < na; ++a) {
      if (edges[a] == 0) unbeaten |= ActionMask{1} << a;
    }
    allowed[s] = unbeaten;
  }
  return allowed;
}

size_t LowestAllowed(ActionMask mask) {
  size_t a = 0;
  while (!((mask >> a) & 1)) ++a;
  return a;
}

struct RestrictedOptimum {
  std::vector<size_t> actions;
  double value = 0.0;
};

double StartValue(const TabularMdp& mdp, const ValueTables& tables) {
  double total = 0.0;
  for (size_t s = 0; s < mdp.n_states(); ++s) {
    total += mdp.start_dist()[s] * tables.v[s];
  }
  return total;
}

// Exact policy iteration over deterministic policies restricted per state.
RestrictedOptimum RestrictedPolicyIteration(
    const TabularMdp& mdp, const std::vector<ActionMask>& allowed) {
  const size_t ns = mdp.n_states();
  const size_t na = mdp.n_actions();
  std::vector<size_t> actions(ns);
  for (size_t s = 0; s < ns; ++s) actions[s] = LowestAllowed(allowed[s]);
  // Strict improvements with a threshold terminate; the bound is a backstop.
  for (size_t iter = 0; iter < 10'000; ++iter) {
    const ValueTables tables =
        PolicyEvaluation(mdp, Policy::Deterministic(actions, na));
    bool changed = false;
    for (size_t s = 0; s < ns; ++s) {
      size_t best = actions[s];
      for (size_t a = 0; a < na; ++a) {
        if (((allowed[s] >> a) & 1) && tables.Q(s, a) > tables.Q(s, best)) best = a;
      }
      if (best != actions[s] &&
          tables.Q(s, best) > tables.Q(s, actions[s]) + kImprovementThreshold) {
        actions[s] = best;
        changed = true;
      }
    }
    if (!changed) return {actions, StartValue(mdp, tables)};
  }
  throw std::runtime_error("restricted policy iteration did not converge");
}

std::vector<double> Perturbed(std::span<const double> belief,
                              std::span<const Perturbation> perturbations,
                              const TabularMdp& mdp) {
  std::vector<double> q(belief.begin(), belief.end());
  for (const Perturbation& p : perturbations) {
    if (p.state >= mdp.n_states() || p.action >= mdp.n_actions()) {
      throw std::invalid_argument("perturbation indexes outside the mdp");
    }
    if (!std::isfinite(p.delta)) {
      throw std::invalid_argument("perturbation delta must be finite");
    }
    q[p.state * mdp.n_actions() + p.action] += p.delta;
  }
  return q;
}

// Fills the relabeling counts and the return check for a perturbed belief.
DisagreementReport Evaluate(const TabularMdp& mdp,
                            std::span<const PreferencePair> pairs,
                            std::span<const double> belief_star,
                            const std::vector<double>& belief_new) {
  const size_t ns = mdp.n_states();
  const size_t na = mdp.n_actions();
  if (belief_star.size() != ns * na) {
    throw std::invalid_argument("belief table does not match the mdp");
  }
  DisagreementReport report = Disagreement(belief_star, belief_new, na);

  const ValueTables star_tables = BeliefTables(
      mdp, BeliefSpec::ExplicitTable({belief_star.begin(), belief_star.end()}));
  const ValueTables new_tables =
      BeliefTables(mdp, BeliefSpec::ExplicitTable(belief_new));
  Rng unused(0);
  for (const PreferencePair& pair : pairs) {
    const double p_star = PrefProbBelief(pair.first, pair.second, star_tables,
                                         mdp.discount(), kNoiseless);
    const double p_new = PrefProbBelief(pair.first, pair.second, new_tables,
                                        mdp.discount(), kNoiseless);
    if (p_new == 0.5) ++report.tied_labels;
    if (SampleLabel(p_star, true, unused) != SampleLabel(p_new, true, unused)) {
      ++report.flipped_labels;
    }
  }

  report.j_star =
      ExpectedReturn(mdp, PostPolicyFromBelief(belief_star, ns, na));
  report.j_delta = ExpectedReturn(mdp, PostPolicyFromBelief(belief_new, ns, na));
  report.bound_value = report.j_star - report.max_delta / (1.0 - mdp.discount());
  report.holds = report.j_delta >= report.bound_value - kBoundTolerance;
  return report;
}

}  // namespace

DisagreementReport Disagreement(std::span<const double> q_a,
                                std::span<const double> q_b, size_t n_actions) {
  if (q_a.size() != q_b.size() || n_actions == 0 || q_a.size() % n_actions != 0) {
    throw std::invalid_argument("disagreement: table dimensions do not match");
  }
  DisagreementReport report;
  for (size_t i = 0; i < q_a.size(); ++i) {
    const double m = std::abs(q_a[i] - q_b[i]);
    if (m > 0.0) report.per_pair.push_back({i / n_actions, i % n_actions, m});
    report.max_delta = std::max(report.max_delta, m);
  }
  return report;
}

Policy PostPolicyFromBelief(std::span<const double> q_belief, size_t n_states,
                            size_t n_actions) {
  if (q_belief.size() != n_states * n_actions) {
    throw std::invalid_argument("belief table has wrong size");
  }
  std::vector<size_t> actions(n_states);
  for (size_t s = 0; s < n_states; ++s) {
    actions[s] = ArgmaxLowest(q_belief.subspan(s * n_actions, n_actions));
  }
  return Policy::Deterministic(actions, n_actions);
}

BestPostPolicy FindBestPostPolicy(const TabularMdp& mdp,
                                  std::span<const PreferencePair> pairs) {
  CheckSingleTransition(pairs, mdp);
  const size_t ns = mdp.n_states();
  const size_t na = mdp.n_actions();
  std::map<std::vector<ActionMask>, RestrictedOptimum> cache;
  const RestrictedOptimum* best = nullptr;
  uint64_t best_labeling = 0;
  size_t consistent = 0;
  const uint64_t n_labelings = uint64_t{1} << pairs.size();
  for (uint64_t labeling = 0; labeling < n_labelings; ++labeling) {
    std::vector<ActionMask> allowed = AllowedActions(mdp, pairs, labeling);
    if (allowed.empty()) continue;
    ++consistent;
    auto it = cache.find(allowed);
    if (it == cache.end()) {
      it = cache.emplace(allowed, RestrictedPolicyIteration(mdp, allowed)).first;
    }
    if (best == nullptr || it->second.value > best->value) {
      best = &it->second;
      best_labeling = labeling;
    }
  }
  if (best == nullptr) {
    throw std::runtime_error("best post policy: no consistent labeling");
  }

  Policy policy = Policy::Deterministic(best->actions, na);
  const ValueTables tables = PolicyEvaluation(mdp, policy);
  std::vector<double> belief = tables.q;
  for (size_t s = 0; s < ns; ++s) {
    std::span<double> row(belief.data() + s * na, na);
    const size_t chosen = best->actions[s];
    if (ArgmaxLowest(row) == chosen) continue;
    double runner_up = -std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < na; ++a) {
      if (a != chosen) runner_up = std::max(runner_up, row[a]);
    }
    row[chosen] = runner_up + kBeliefMargin;
  }

  BestPostPolicy result{std::move(policy), StartValue(mdp, tables),
                        std::move(belief), {}, consistent};
  for (size_t i = 0; i < pairs.size(); ++i) {
    result.labels.push_back(((best_labeling >> i) & 1) ? Side::kSecond
                                                       : Side::kFirst);
  }
  return result;
}

double EnumerateBestPostReturn(const TabularMdp& mdp,
                               std::span<const PreferencePair> pairs,
                               size_t max_candidates) {
  CheckSingleTransition(pairs, mdp);
  const size_t ns = mdp.n_states();
  const size_t na = mdp.n_actions();
  std::map<std::vector<ActionMask>, double> seen;
  size_t candidates = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (uint64_t labeling = 0; labeling < (uint64_t{1} << pairs.size()); ++labeling) {
    std::vector<ActionMask> allowed = AllowedActions(mdp, pairs, labeling);
    if (allowed.empty() || seen.contains(allowed)) continue;
    std::vector<std::vector<size_t>> choices(ns);
    size_t product = 1;
    for (size_t s = 0; s < ns; ++s) {
      for (size_t a = 0; a < na; ++a) {
        if ((allowed[s] >> a) & 1) choices[s].push_back(a);
      }
      product *= choices[s].size();
      if (candidates + product > max_candidates) {
        throw std::invalid_argument("enumeration exceeds the candidate cap");
      }
    }
    candidates += product;
    double best_here = -std::numeric_limits<double>::infinity();
    std::vector<size_t> digit(ns, 0);
    std::vector<size_t> actions(ns);
    for (size_t k = 0; k < product; ++k) {
      for (size_t s = 0; s < ns; ++s) actions[s] = choices[s][digit[s]];
      best_here = std::max(best_here,
                           ExpectedReturn(mdp, Policy::Deterministic(actions, na)));
      for (size_t s = 0; s < ns; ++s) {
        if (++digit[s] < choices[s].size()) break;
        digit[s] = 0;
      }
    }
    seen.emplace(std::move(allowed), best_here);
    best = std::max(best, best_here);
  }
  return best;
}

std::vector<DisagreementReport> VerifySingleDisagreements(
    const TabularMdp& mdp, std::span<const PreferencePair> pairs,
    std::span<const double> belief_star,
    std::span<const Perturbation> perturbations) {
  std::vector<DisagreementReport> reports;
  reports.reserve(perturbations.size());
  for (const Perturbation& p : perturbations) {
    reports.push_back(Evaluate(mdp, pairs, belief_star,
                               Perturbed(belief_star, {&p, 1}, mdp)));
  }
  return reports;
}

DisagreementReport VerifyJointDisagreements(const TabularMdp& mdp,
                                   std::span<const PreferencePair> pairs,
                                   std::span<const double> belief_star,
                                   std::span<const Perturbation> perturbations) {
  return Evaluate(mdp, pairs, belief_star,
                  Perturbed(belief_star, perturbations, mdp));
}

CaseStudyFlip EvaluateCaseStudyFlip(double p_lose, double discount) {
  if (!(p_lose >= 0.0 && p_lose <= 1.0)) {
    throw std::invalid_argument("p_lose must lie in [0, 1]");
  }
  using namespace case_study;
  const TabularMdp mdp = BuildCaseStudy(discount);
  std::vector<double> probs(mdp.n_states() * mdp.n_actions(), 0.5);
  probs[kRiskState * mdp.n_actions() + kLose] = p_lose;
  probs[kRiskState * mdp.n_actions() + kWin] = 1.0 - p_lose;
  const Policy believed(mdp.n_states(), mdp.n_actions(), std::move(probs));
  const ValueTables tables = PolicyEvaluation(mdp, believed);

  const Segment risky{{{kStart, kRisk, kRiskState}}};
  const Segment safe{{{kStart, kSafe, kSafeState}}};
  CaseStudyFlip flip;
  flip.gap = SegmentAdvScore(risky, tables, discount) -
             SegmentAdvScore(safe, tables, discount);
  const double p = PrefProbBelief(risky, safe, tables, discount, kNoiseless);
  flip.preferred = p > 0.5 ? FlipOutcome::kRisk
                           : (p < 0.5 ? FlipOutcome::kSafe : FlipOutcome::kTie);
  return flip;
}

const char* FlipOutcomeName(FlipOutcome outcome) {
  switch (outcome) {
    case FlipOutcome::kRisk: return "risk";
    case FlipOutcome::kSafe: return "safe";
    case FlipOutcome::kTie: return "tie";
  }
  return "unknown";
}

TabularMdp RandomMdp(const RandomMdpOptions& o, Rng& rng) {
  const size_t ns = o.min_states + rng.UniformInt(o.max_states - o.min_states + 1);
  const size_t na = o.min_actions + rng.UniformInt(o.max_actions - o.min_actions + 1);
  const double discount =
      o.min_discount + (o.max_discount - o.min_discount) * rng.Uniform();
  std::vector<bool> terminal(ns, false);
  for (size_t s = 1; s < ns; ++s) terminal[s] = rng.Bernoulli(o.terminal_probability);

  std::vector<double> transition(ns * na * ns, 0.0);
  std::vector<double> reward(ns * na * ns, 0.0);
  std::vector<size_t> states(ns);
  for (size_t s = 0; s < ns; ++s) {
    for (size_t a = 0; a < na; ++a) {
      const size_t base = (s * na + a) * ns;
      if (terminal[s]) {
        transition[base + s] = 1.0;
        continue;
      }
      for (size_t i = 0; i < ns; ++i) states[i] = i;
      rng.Shuffle(std::span<size_t>(states));
      const size_t k = 1 + rng.UniformInt(std::min(o.max_successors, ns));
      double total = 0.0;
      for (size_t i = 0; i < k; ++i) {
        const double w = 0.05 + rng.Uniform();
        transition[base + states[i]] = w;
        total += w;
      }
      for (size_t next = 0; next < ns; ++next) {
        transition[base + next] /= total;
        reward[base + next] = o.reward_scale * (2.0 * rng.Uniform() - 1.0);
      }
    }
  }
  std::vector<double> start(ns, 0.0);
  double total = 0.0;
  for (size_t s = 0; s < ns; ++s) {
    if (terminal[s]) continue;
    start[s] = 0.05 + rng.Uniform();
    total += start[s];
  }
  for (double& p : start) p /= total;
  return TabularMdp(ns, na, std::move(transition), std::move(reward), discount,
                    std::move(start), std::move(terminal));
}

Policy RandomPolicy(size_t n_states, size_t n_actions, Rng& rng) {
  std::vector<double> probs(n_states * n_actions);
  for (size_t s = 0; s < n_states; ++s) {
    double total = 0.0;
    for (size_t a = 0; a < n_actions; ++a) {
      probs[s * n_actions + a] = -std::log(1.0 - rng.Uniform());
      total += probs[s * n_actions + a];
    }
    for (size_t a = 0; a < n_actions; ++a) probs[s * n_actions + a] /= total;
  }
  return Policy(n_states, n_actions, std::move(probs));
}

std::vector<PreferencePair> RandomSingleTransitionPairs(
    const TabularMdp& mdp, size_t n_pairs, double same_state_fraction,
    Rng& rng) {
  std::vector<size_t> live;
  for (size_t s = 0; s < mdp.n_states(); ++s) {
    if (!mdp.IsTerminal(s)) live.push_back(s);
  }
  if (live.empty()) throw std::invalid_argument("mdp has no non-terminal state");
  const size_t na = mdp.n_actions();
  auto step = [&](size_t s, size_t a) {
    return Segment{{{s, a, rng.Categorical(mdp.TransitionRow(s, a))}}};
  };
  std::vector<PreferencePair> pairs;
  for (size_t i = 0; i < n_pairs; ++i) {
    PreferencePair pair;
    if (na >= 2 && rng.Bernoulli(same_state_fraction)) {
      const size_t s = live[rng.UniformInt(live.size())];
      const size_t a1 = rng.UniformInt(na);
      const size_t a2 = (a1 + 1 + rng.UniformInt(na - 1)) % na;
      pair.first = step(s, a1);
      pair.second = step(s, a2);
    } else {
      pair.first = step(live[rng.UniformInt(live.size())], rng.UniformInt(na));
      pair.second = step(live[rng.UniformInt(live.size())], rng.UniformInt(na));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace beliefrl
