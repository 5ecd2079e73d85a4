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

#ifndef BELIEFRL_CPL_H_
#define BELIEFRL_CPL_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "beliefrl/mdp.h"
#include "beliefrl/preferences.h"
#include "beliefrl/rng.h"
#include "json.hpp"

namespace beliefrl {

// Tabular softmax policy parameters, row-major (s, a).
struct SoftmaxPolicyParams {
  size_t n_states = 0;
  size_t n_actions = 0;
  std::vector<double> logits;

  static SoftmaxPolicyParams Zeros(size_t n_states, size_t n_actions) {
    return {n_states, n_actions, std::vector<double>(n_states * n_actions, 0.0)};
  }
  double LogProb(size_t s, size_t a) const;
  Policy ToPolicy() const;
};

struct CplConfig {
  double alpha = 10.0;
  double discount = 0.7;
  double learning_rate = 0.5;
  size_t epochs = 20;
  // Scales the score of the non-preferred segment.
  double lambda_bias = 1.0;
  double l2_coeff = 0.01;
  size_t seeds = 20;
  // 0 means full-batch descent; otherwise pairs are shuffled each epoch and
  // visited in minibatches of this size.
  size_t minibatch_size = 0;

  // Gridworld hyperparameters; the 0.01 regularizer is an L2
  // penalty on the logits.
  static CplConfig Preset();
  // Same, but the 0.01 regularizer is read as the non-preferred score bias.
  static CplConfig BiasPreset();
  static CplConfig Named(const std::string& name);

  void Validate() const;
};

nlohmann::json CplConfigToJson(const CplConfig& cfg);
// Starts from `base` and overrides the fields present in `j`; unknown keys
// are rejected.
CplConfig CplConfigFromJson(const nlohmann::json& j,
                            const CplConfig& base = CplConfig::Preset());

// alpha * sum_t discount^t log pi(a_t | s_t).
double CplSegmentLogProb(const SoftmaxPolicyParams& params,
                         const Segment& segment, double discount, double alpha);

// Mean over pairs of -log sigmoid(score+ - lambda_bias * score-), plus
// l2_coeff * ||logits||^2. An empty pair list leaves only the L2 term.
double CplLoss(const SoftmaxPolicyParams& params,
               std::span<const PreferencePair> pairs, const CplConfig& cfg);
std::vector<double> CplGrad(const SoftmaxPolicyParams& params,
                            std::span<const PreferencePair> pairs,
                            const CplConfig& cfg);

struct CplTrainingResult {
  SoftmaxPolicyParams params;
  Policy policy;
  // loss_curve[e] is the full-dataset loss before epoch e; the final entry is
  // the loss after training.
  std::vector<double> loss_curve;
};

// Gradient descent from zero logits. Throws std::runtime_error if the loss
// becomes non-finite.
CplTrainingResult TrainCpl(std::span<const PreferencePair> pairs,
                           size_t n_states, size_t n_actions,
                           const CplConfig& cfg, Rng& rng);

nlohmann::json SoftmaxParamsToJson(const SoftmaxPolicyParams& params);
void WriteLossCurveCsv(std::span<const double> curve, std::ostream& out);

}  // namespace beliefrl

#endif  // BELIEFRL_CPL_H_
