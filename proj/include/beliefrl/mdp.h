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

#ifndef BELIEFRL_MDP_H_
#define BELIEFRL_MDP_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "beliefrl/rng.h"
#include "json.hpp"

namespace beliefrl {

// Finite MDP with dense (s, a, s') transition and reward tensors. Immutable
// after construction; the constructor enforces row-stochasticity, terminal
// absorption and a normalized start distribution.
class TabularMdp {
 public:
  TabularMdp(size_t n_states, size_t n_actions, std::vector<double> transition,
             std::vector<double> reward, double discount,
             std::vector<double> start_dist, std::vector<bool> terminal);

  size_t n_states() const { return n_states_; }
  size_t n_actions() const { return n_actions_; }
  double discount() const { return discount_; }
  const std::vector<double>& start_dist() const { return start_dist_; }
  const std::vector<bool>& terminal() const { return terminal_; }
  bool IsTerminal(size_t s) const { return terminal_[s]; }

  double P(size_t s, size_t a, size_t next) const {
    return transition_[Index(s, a) + next];
  }
  double R(size_t s, size_t a, size_t next) const {
    return reward_[Index(s, a) + next];
  }
  std::span<const double> TransitionRow(size_t s, size_t a) const {
    return {transition_.data() + Index(s, a), n_states_};
  }
  std::span<const double> RewardRow(size_t s, size_t a) const {
    return {reward_.data() + Index(s, a), n_states_};
  }
  const std::vector<double>& transition() const { return transition_; }
  const std::vector<double>& reward() const { return reward_; }

  // Sum over s' of P(s'|s,a) r(s,a,s').
  double ExpectedReward(size_t s, size_t a) const;

 private:
  size_t Index(size_t s, size_t a) const {
    return (s * n_actions_ + a) * n_states_;
  }

  size_t n_states_;
  size_t n_actions_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  double discount_;
  std::vector<double> start_dist_;
  std::vector<bool> terminal_;
};

// Stochastic tabular policy pi(a|s), stored row-major.
class Policy {
 public:
  Policy(size_t n_states, size_t n_actions, std::vector<double> probs);

  static Policy Uniform(size_t n_states, size_t n_actions);
  static Policy Deterministic(std::span<const size_t> actions,
                              size_t n_actions);

  size_t n_states() const { return n_states_; }
  size_t n_actions() const { return n_actions_; }
  double operator()(size_t s, size_t a) const {
    return probs_[s * n_actions_ + a];
  }
  std::span<const double> Row(size_t s) const {
    return {probs_.data() + s * n_actions_, n_actions_};
  }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const Policy&) const = default;

 private:
  size_t n_states_;
  size_t n_actions_;
  std::vector<double> probs_;
};

struct Transition {
  size_t state = 0;
  size_t action = 0;
  size_t next_state = 0;

  bool operator==(const Transition&) const = default;
};

// Reward-free trajectory piece. Rewards are always recomputed from the MDP.
struct Segment {
  std::vector<Transition> transitions;

  size_t size() const { return transitions.size(); }
  const Transition& operator[](size_t t) const { return transitions[t]; }
  bool operator==(const Segment&) const = default;
};

// Throws std::invalid_argument if the segment is empty or not chained.
void ValidateSegment(const Segment& segment);

// Samples a trajectory from start_dist. Stops on entering a terminal state or
// after max_transitions transitions.
Segment Rollout(const TabularMdp& mdp, const Policy& policy,
                size_t max_transitions, Rng& rng);

// 7x7 gridworld.

inline constexpr int kGridSize = 7;

struct GridCoord {
  int row = 0;
  int col = 0;

  bool operator==(const GridCoord&) const = default;
};

enum GridMove : size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

inline size_t GridState(GridCoord c) {
  return static_cast<size_t>(c.row * kGridSize + c.col);
}
inline GridCoord GridCoordOf(size_t s) {
  return {static_cast<int>(s) / kGridSize, static_cast<int>(s) % kGridSize};
}

struct GridworldRewards {
  double step = -1.0;
  // Added on top of `step` when a move would leave the grid.
  double off_grid_extra = -1.0;
  double goal = 200.0;
  double cliff = -200.0;
};

inline constexpr GridCoord kGridStart{6, 6};
inline constexpr GridCoord kGridGoal{0, 6};
inline constexpr GridCoord kGridCliffs[2] = {{3, 6}, {4, 6}};

TabularMdp BuildGridworld(double discount, const GridworldRewards& rewards = {});

// Six-state safe/risky lottery MDP with two actions per state.
namespace case_study {
inline constexpr size_t kStart = 0;
inline constexpr size_t kSafeState = 1;
inline constexpr size_t kRiskState = 2;
inline constexpr size_t kNeutral = 3;
inline constexpr size_t kLoseState = 4;
inline constexpr size_t kWinState = 5;

// Actions at kStart.
inline constexpr size_t kSafe = 0;
inline constexpr size_t kRisk = 1;
// Actions at kRiskState.
inline constexpr size_t kLose = 0;
inline constexpr size_t kWin = 1;
// kSafeState has a single real action (0) leading to kNeutral.
inline constexpr size_t kProceed = 0;
}  // namespace case_study

TabularMdp BuildCaseStudy(double discount);

// Builds an MDP by name: "gridworld" or "case_study".
TabularMdp BuildNamedMdp(const std::string& name, double discount);

nlohmann::json MdpToJson(const TabularMdp& mdp);
TabularMdp MdpFromJson(const nlohmann::json& j);

nlohmann::json PolicyToJson(const Policy& policy);
Policy PolicyFromJson(const nlohmann::json& j);

nlohmann::json SegmentToJson(const Segment& segment);
Segment SegmentFromJson(const nlohmann::json& j);

}  // namespace beliefrl

#endif  // BELIEFRL_MDP_H_
