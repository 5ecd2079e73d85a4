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

#ifndef BELIEFRL_EXPERIMENT_H_
#define BELIEFRL_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "beliefrl/bounds.h"
#include "beliefrl/cpl.h"
#include "beliefrl/mdp.h"
#include "beliefrl/rng.h"
#include "json.hpp"

namespace beliefrl {

enum class EvalMode { kDiscounted, kUndiscounted };
enum class EvalSampling { kSoftmax, kGreedy };

struct MdpSpec {
  std::string builder = "gridworld";
  double discount = 0.7;

  TabularMdp Build() const { return BuildNamedMdp(builder, discount); }
};

// {"builder": "gridworld"|"case_study", "discount": g}; strict.
MdpSpec MdpSpecFromJson(const nlohmann::json& j);

struct EvalOptions {
  double agent_eps = 0.0;
  size_t n_episodes = 100;
  EvalMode mode = EvalMode::kDiscounted;
  EvalSampling sampling = EvalSampling::kSoftmax;
  size_t cap = 1000;
};

// Executes the trained policy with eps-greedy noise: with probability eps a
// uniform action, otherwise a sample from the policy (or its argmax in
// greedy mode). Returns one return per episode.
std::vector<double> EvaluatePolicy(const TabularMdp& mdp, const Policy& trained,
                                   const EvalOptions& options, Rng& rng);

// The policy actually executed by EvaluatePolicy.
Policy ExecutionPolicy(const Policy& trained, double agent_eps,
                       EvalSampling sampling);

struct ExperimentConfig {
  MdpSpec mdp;
  std::vector<double> agent_eps_list{0.0, 0.1, 0.3, 0.5};
  std::vector<double> labeler_eps_list{0.0, 0.1, 0.3, 0.5};
  size_t n_trajectories = 100;
  size_t segment_len = 1;
  size_t n_pairs = 500;
  size_t cap = 1000;
  // Labeling inverse temperature; defaults to cpl.alpha when unset.
  std::optional<double> label_alpha;
  CplConfig cpl = CplConfig::Preset();
  size_t n_seeds = 20;
  size_t n_eval_episodes = 100;
  EvalMode eval_mode = EvalMode::kDiscounted;
  EvalSampling eval_sampling = EvalSampling::kSoftmax;
  uint64_t master_seed = 0;

  static ExperimentConfig Table1Preset();
  double LabelAlpha() const { return label_alpha.value_or(cpl.alpha); }
  void Validate() const;
};

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg);
// Strict: unknown keys and out-of-range values raise std::invalid_argument
// naming the field. "preset": "table1" selects the starting point.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);

struct MatrixCell {
  double agent_eps = 0.0;
  double labeler_eps = 0.0;
  double mean_return = 0.0;
  double ci95_halfwidth = 0.0;
  size_t n_samples = 0;
};

struct MatrixResult {
  // Row-major: labeler_eps (rows) x agent_eps (columns).
  std::vector<MatrixCell> cells;
  size_t n_rows = 0;
  size_t n_cols = 0;

  const MatrixCell& At(size_t row, size_t col) const {
    return cells[row * n_cols + col];
  }
};

// Mean and 1.96 * sample std / sqrt(n); zero half-width for n == 1.
std::pair<double, double> MeanAndCi95(const std::vector<double>& samples);

// Seed streams. Training/data for (labeler row, seed) and evaluation for
// (cell, seed) are derived independently from the master seed.
uint64_t TrainingSeed(uint64_t master, size_t row, size_t seed_index);
uint64_t EvalSeed(uint64_t master, size_t cell, size_t seed_index);

MatrixResult RunMatrix(const ExperimentConfig& cfg);

void WriteMatrixCsv(const MatrixResult& result, std::ostream& out);
nlohmann::json MatrixMetadataJson(const ExperimentConfig& cfg,
                                  const MatrixResult& result);

struct BoundSweepConfig {
  size_t n_instances = 50;
  std::vector<double> deltas{0.1, 0.5, 1.0, 5.0};
  size_t n_pairs = 6;
  double same_state_fraction = 0.8;
  RandomMdpOptions random_mdp;
  size_t joint_instances = 50;
  size_t joint_perturbations = 3;
  uint64_t master_seed = 0;

  void Validate() const;
};

nlohmann::json BoundSweepConfigToJson(const BoundSweepConfig& cfg);
BoundSweepConfig BoundSweepConfigFromJson(const nlohmann::json& j);

struct BoundRow {
  size_t instance = 0;
  std::vector<Perturbation> perturbations;
  DisagreementReport report;
};

struct BoundSweepResult {
  std::vector<BoundRow> single_rows;
  std::vector<BoundRow> joint_rows;

  size_t SingleHolds() const;
  size_t JointHolds() const;
};

BoundSweepResult RunBoundSweep(const BoundSweepConfig& cfg);

// Columns: instance, state, action, delta, j_star, j_delta, bound_value,
// holds. Joint rows join their perturbations with ';'.
void WriteBoundCsv(const std::vector<BoundRow>& rows, std::ostream& out);
nlohmann::json BoundSummaryJson(const BoundSweepConfig& cfg,
                                const BoundSweepResult& result);

// Fixed-format number rendering shared by the CSV writers.
std::string FormatNumber(double x);

}  // namespace beliefrl

#endif  // BELIEFRL_EXPERIMENT_H_
