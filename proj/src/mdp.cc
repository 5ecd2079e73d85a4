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

#include "beliefrl/mdp.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace beliefrl {
namespace {

constexpr double kSumTolerance = 1e-12;

void Require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

TabularMdp::TabularMdp(size_t n_states, size_t n_actions,
                       std::vector<double> transition,
                       std::vector<double> reward, double discount,
                       std::vector<double> start_dist,
                       std::vector<bool> terminal)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      discount_(discount),
      start_dist_(std::move(start_dist)),
      terminal_(std::move(terminal)) {
  Require(n_states_ > 0 && n_actions_ > 0, "mdp: empty state or action set");
  const size_t tensor = n_states_ * n_actions_ * n_states_;
  Require(transition_.size() == tensor, "mdp: transition has wrong size");
  Require(reward_.size() == tensor, "mdp: reward has wrong size");
  Require(start_dist_.size() == n_states_, "mdp: start_dist has wrong size");
  Require(terminal_.size() == n_states_, "mdp: terminal has wrong size");
  Require(discount_ >= 0.0 && discount_ < 1.0,
          "mdp: discount must lie in [0, 1)");

  for (size_t s = 0; s < n_states_; ++s) {
    for (size_t a = 0; a < n_actions_; ++a) {
      double sum = 0.0;
      for (size_t next = 0; next < n_states_; ++next) {
        const double p = P(s, a, next);
        Require(std::isfinite(p) && p >= 0.0,
                "mdp: negative or non-finite transition probability");
        Require(std::isfinite(R(s, a, next)), "mdp: non-finite reward");
        sum += p;
      }
      Require(std::abs(sum - 1.0) <= kSumTolerance,
              "mdp: transition row (" + std::to_string(s) + ", " +
                  std::to_string(a) + ") does not sum to 1");
      if (terminal_[s]) {
        Require(P(s, a, s) == 1.0,
                "mdp: terminal state " + std::to_string(s) +
                    " must self-transition with probability 1");
        for (size_t next = 0; next < n_states_; ++next) {
          Require(R(s, a, next) == 0.0,
                  "mdp: terminal state " + std::to_string(s) +
                      " must have zero reward");
        }
      }
    }
  }
  double start_sum = 0.0;
  for (double p : start_dist_) {
    Require(std::isfinite(p) && p >= 0.0, "mdp: invalid start_dist entry");
    start_sum += p;
  }
  Require(std::abs(start_sum - 1.0) <= kSumTolerance,
          "mdp: start_dist does not sum to 1");
}

double TabularMdp::ExpectedReward(size_t s, size_t a) const {
  const auto p = TransitionRow(s, a);
  const auto r = RewardRow(s, a);
  double total = 0.0;
  for (size_t next = 0; next < n_states_; ++next) total += p[next] * r[next];
  return total;
}

Policy::Policy(size_t n_states, size_t n_actions, std::vector<double> probs)
    : n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
  Require(n_states_ > 0 && n_actions_ > 0, "policy: empty dimensions");
  Require(probs_.size() == n_states_ * n_actions_, "policy: wrong size");
  for (size_t s = 0; s < n_states_; ++s) {
    double sum = 0.0;
    for (double p : Row(s)) {
      Require(std::isfinite(p) && p >= 0.0, "policy: invalid probability");
      sum += p;
    }
    Require(std::abs(sum - 1.0) <= kSumTolerance,
            "policy: row " + std::to_string(s) + " does not sum to 1");
  }
}

Policy Policy::Uniform(size_t n_states, size_t n_actions) {
  return Policy(n_states, n_actions,
                std::vector<double>(n_states * n_actions,
                                    1.0 / static_cast<double>(n_actions)));
}

Policy Policy::Deterministic(std::span<const size_t> actions,
                             size_t n_actions) {
  std::vector<double> probs(actions.size() * n_actions, 0.0);
  for (size_t s = 0; s < actions.size(); ++s) {
    Require(actions[s] < n_actions, "policy: action index out of range");
    probs[s * n_actions + actions[s]] = 1.0;
  }
  return Policy(actions.size(), n_actions, std::move(probs));
}

void ValidateSegment(const Segment& segment) {
  Require(!segment.transitions.empty(), "segment: empty");
  for (size_t t = 0; t + 1 < segment.size(); ++t) {
    Require(segment[t].next_state == segment[t + 1].state,
            "segment: transition " + std::to_string(t) +
                " is not chained to its successor");
  }
}

Segment Rollout(const TabularMdp& mdp, const Policy& policy,
                size_t max_transitions, Rng& rng) {
  Require(max_transitions >= 1, "rollout: max_transitions must be >= 1");
  Require(policy.n_states() == mdp.n_states() &&
              policy.n_actions() == mdp.n_actions(),
          "rollout: policy does not match mdp");
  Segment segment;
  size_t s = rng.Categorical(mdp.start_dist());
  // A start state that is already terminal yields a single absorbing step.
  while (segment.size() < max_transitions) {
    const size_t a = rng.Categorical(policy.Row(s));
    const size_t next = rng.Categorical(mdp.TransitionRow(s, a));
    segment.transitions.push_back({s, a, next});
    if (mdp.IsTerminal(next) || mdp.IsTerminal(s)) break;
    s = next;
  }
  return segment;
}

TabularMdp BuildGridworld(double discount, const GridworldRewards& rewards) {
  constexpr size_t kStates = kGridSize * kGridSize;
  constexpr size_t kActions = 4;
  std::vector<double> transition(kStates * kActions * kStates, 0.0);
  std::vector<double> reward(kStates * kActions * kStates, 0.0);
  std::vector<bool> terminal(kStates, false);
  terminal[GridState(kGridGoal)] = true;
  for (const GridCoord& c : kGridCliffs) terminal[GridState(c)] = true;

  constexpr int kDeltaRow[kActions] = {-1, 1, 0, 0};
  constexpr int kDeltaCol[kActions] = {0, 0, -1, 1};

  auto cell_reward = [&](size_t s) {
    if (s == GridState(kGridGoal)) return rewards.goal;
    for (const GridCoord& c : kGridCliffs) {
      if (s == GridState(c)) return rewards.cliff;
    }
    return rewards.step;
  };

  for (size_t s = 0; s < kStates; ++s) {
    for (size_t a = 0; a < kActions; ++a) {
      const size_t base = (s * kActions + a) * kStates;
      if (terminal[s]) {
        transition[base + s] = 1.0;
        continue;
      }
      const GridCoord here = GridCoordOf(s);
      const GridCoord there{here.row + kDeltaRow[a], here.col + kDeltaCol[a]};
      const bool inside = there.row >= 0 && there.row < kGridSize &&
                          there.col >= 0 && there.col < kGridSize;
      if (inside) {
        const size_t next = GridState(there);
        transition[base + next] = 1.0;
        reward[base + next] = cell_reward(next);
      } else {
        transition[base + s] = 1.0;
        reward[base + s] = cell_reward(s) + rewards.off_grid_extra;
      }
    }
  }
  std::vector<double> start(kStates, 0.0);
  start[GridState(kGridStart)] = 1.0;
  return TabularMdp(kStates, kActions, std::move(transition), std::move(reward),
                    discount, std::move(start), std::move(terminal));
}

TabularMdp BuildCaseStudy(double discount) {
  using namespace case_study;
  constexpr size_t kStates = 6;
  constexpr size_t kActions = 2;
  std::vector<double> transition(kStates * kActions * kStates, 0.0);
  std::vector<double> reward(kStates * kActions * kStates, 0.0);
  auto set = [&](size_t s, size_t a, size_t next, double r) {
    const size_t base = (s * kActions + a) * kStates;
    transition[base + next] = 1.0;
    reward[base + next] = r;
  };
  set(kStart, kSafe, kSafeState, 0.0);
  set(kStart, kRisk, kRiskState, 0.0);
  set(kSafeState, kProceed, kNeutral, 0.0);
  set(kSafeState, 1, kSafeState, 0.0);  // padding
  set(kRiskState, kLose, kLoseState, -10.0);
  set(kRiskState, kWin, kWinState, 10.0);
  std::vector<bool> terminal(kStates, false);
  for (size_t s : {kNeutral, kLoseState, kWinState}) {
    terminal[s] = true;
    for (size_t a = 0; a < kActions; ++a) set(s, a, s, 0.0);
  }
  std::vector<double> start(kStates, 0.0);
  start[kStart] = 1.0;
  return TabularMdp(kStates, kActions, std::move(transition), std::move(reward),
                    discount, std::move(start), std::move(terminal));
}

TabularMdp BuildNamedMdp(const std::string& name, double discount) {
  if (name == "gridworld") return BuildGridworld(discount);
  if (name == "case_study") return BuildCaseStudy(discount);
  throw std::invalid_argument("mdp.builder: unknown builder '" + name + "'");
}

namespace {

nlohmann::json Tensor3(const std::vector<double>& flat, size_t s_count,
                       size_t a_count) {
  nlohmann::json out = nlohmann::json::array();
  for (size_t s = 0; s < s_count; ++s) {
    nlohmann::json by_action = nlohmann::json::array();
    for (size_t a = 0; a < a_count; ++a) {
      const auto first = flat.begin() + static_cast<std::ptrdiff_t>(
                                            (s * a_count + a) * s_count);
      by_action.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(s_count)));
    }
    out.push_back(std::move(by_action));
  }
  return out;
}

std::vector<double> FlattenTensor3(const nlohmann::json& j, size_t s_count,
                                   size_t a_count, const std::string& field) {
  Require(j.is_array() && j.size() == s_count,
          "mdp." + field + ": expected " + std::to_string(s_count) + " rows");
  std::vector<double> flat;
  flat.reserve(s_count * a_count * s_count);
  for (const auto& by_action : j) {
    Require(by_action.is_array() && by_action.size() == a_count,
            "mdp." + field + ": expected " + std::to_string(a_count) +
                " actions per state");
    for (const auto& row : by_action) {
      Require(row.is_array() && row.size() == s_count,
              "mdp." + field + ": expected " + std::to_string(s_count) +
                  " next states");
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
  }
  return flat;
}

}  // namespace

nlohmann::json MdpToJson(const TabularMdp& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states();
  j["n_actions"] = mdp.n_actions();
  j["transition"] = Tensor3(mdp.transition(), mdp.n_states(), mdp.n_actions());
  j["reward"] = Tensor3(mdp.reward(), mdp.n_states(), mdp.n_actions());
  j["discount"] = mdp.discount();
  j["start_dist"] = mdp.start_dist();
  j["terminal"] = mdp.terminal();
  return j;
}

TabularMdp MdpFromJson(const nlohmann::json& j) {
  for (const char* key : {"n_states", "n_actions", "transition", "reward",
                          "discount", "start_dist", "terminal"}) {
    Require(j.contains(key), std::string("mdp: missing field ") + key);
  }
  const auto n_states = j.at("n_states").get<size_t>();
  const auto n_actions = j.at("n_actions").get<size_t>();
  return TabularMdp(
      n_states, n_actions,
      FlattenTensor3(j.at("transition"), n_states, n_actions, "transition"),
      FlattenTensor3(j.at("reward"), n_states, n_actions, "reward"),
      j.at("discount").get<double>(),
      j.at("start_dist").get<std::vector<double>>(),
      j.at("terminal").get<std::vector<bool>>());
}

nlohmann::json PolicyToJson(const Policy& policy) {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t s = 0; s < policy.n_states(); ++s) {
    const auto row = policy.Row(s);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"n_states", policy.n_states()},
          {"n_actions", policy.n_actions()},
          {"probs", std::move(rows)}};
}

Policy PolicyFromJson(const nlohmann::json& j) {
  const auto n_states = j.at("n_states").get<size_t>();
  const auto n_actions = j.at("n_actions").get<size_t>();
  std::vector<double> probs;
  const auto& rows = j.at("probs");
  Require(rows.is_array() && rows.size() == n_states, "policy.probs: bad shape");
  for (const auto& row : rows) {
    Require(row.is_array() && row.size() == n_actions,
            "policy.probs: bad row length");
    for (const auto& p : row) probs.push_back(p.get<double>());
  }
  return Policy(n_states, n_actions, std::move(probs));
}

nlohmann::json SegmentToJson(const Segment& segment) {
  nlohmann::json out = nlohmann::json::array();
  for (const Transition& t : segment.transitions) {
    out.push_back({t.state, t.action, t.next_state});
  }
  return out;
}

Segment SegmentFromJson(const nlohmann::json& j) {
  Require(j.is_array(), "segment: expected an array of triples");
  Segment segment;
  for (const auto& triple : j) {
    Require(triple.is_array() && triple.size() == 3,
            "segment: each transition must be a [state, action, next] triple");
    segment.transitions.push_back({triple[0].get<size_t>(),
                                   triple[1].get<size_t>(),
                                   triple[2].get<size_t>()});
  }
  ValidateSegment(segment);
  return segment;
}

}  // namespace beliefrl
