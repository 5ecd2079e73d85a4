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

#include "beliefrl/experiment.h"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "beliefrl/preferences.h"
#include "beliefrl/solvers.h"

namespace beliefrl {
namespace {

// Keeps training streams disjoint from evaluation streams.
constexpr uint64_t kTrainingDomain = 0x7472'6169'6e00'0000ULL;

[[noreturn]] void BadField(const std::string& field, const std::string& why) {
  throw std::invalid_argument(field + ": " + why);
}

template <typename T>
T Get(const nlohmann::json& value, const std::string& field) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    BadField(field, "wrong type");
  }
}

void CheckEpsList(const std::vector<double>& list, const std::string& field) {
  if (list.empty()) BadField(field, "must not be empty");
  for (double e : list) {
    if (!(e >= 0.0 && e <= 1.0)) BadField(field, "values must lie in [0, 1]");
  }
}

const char* ModeName(EvalMode m) {
  return m == EvalMode::kDiscounted ? "discounted" : "undiscounted";
}
const char* SamplingName(EvalSampling s) {
  return s == EvalSampling::kSoftmax ? "softmax" : "greedy";
}

RandomMdpOptions RandomMdpOptionsFromJson(const nlohmann::json& j) {
  RandomMdpOptions o;
  for (const auto& [key, value] : j.items()) {
    const std::string f = "random_mdp." + key;
    if (key == "min_states") o.min_states = Get<size_t>(value, f);
    else if (key == "max_states") o.max_states = Get<size_t>(value, f);
    else if (key == "min_actions") o.min_actions = Get<size_t>(value, f);
    else if (key == "max_actions") o.max_actions = Get<size_t>(value, f);
    else if (key == "min_discount") o.min_discount = Get<double>(value, f);
    else if (key == "max_discount") o.max_discount = Get<double>(value, f);
    else if (key == "reward_scale") o.reward_scale = Get<double>(value, f);
    else if (key == "terminal_probability") o.terminal_probability = Get<double>(value, f);
    else if (key == "max_successors") o.max_successors = Get<size_t>(value, f);
    else BadField(f, "unknown field");
  }
  return o;
}

}  // namespace

MdpSpec MdpSpecFromJson(const nlohmann::json& j) {
  if (!j.is_object()) BadField("mdp", "expected an object");
  MdpSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "builder") spec.builder = Get<std::string>(value, "mdp.builder");
    else if (key == "discount") spec.discount = Get<double>(value, "mdp.discount");
    else BadField("mdp." + key, "unknown field");
  }
  if (spec.builder != "gridworld" && spec.builder != "case_study") {
    BadField("mdp.builder", "unknown builder '" + spec.builder + "'");
  }
  if (!(spec.discount >= 0.0 && spec.discount < 1.0)) {
    BadField("mdp.discount", "must lie in [0, 1)");
  }
  return spec;
}

std::string FormatNumber(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

Policy ExecutionPolicy(const Policy& trained, double agent_eps,
                       EvalSampling sampling) {
  const size_t ns = trained.n_states();
  const size_t na = trained.n_actions();
  const double spread = agent_eps / static_cast<double>(na);
  std::vector<double> probs(ns * na);
  for (size_t s = 0; s < ns; ++s) {
    const auto row = trained.Row(s);
    const size_t greedy = ArgmaxLowest(row);
    for (size_t a = 0; a < na; ++a) {
      const double base = sampling == EvalSampling::kSoftmax
                              ? row[a]
                              : (a == greedy ? 1.0 : 0.0);
      probs[s * na + a] = (1.0 - agent_eps) * base + spread;
    }
  }
  // Renormalize rows against rounding.
  for (size_t s = 0; s < ns; ++s) {
    double total = 0.0;
    for (size_t a = 0; a < na; ++a) total += probs[s * na + a];
    for (size_t a = 0; a < na; ++a) probs[s * na + a] /= total;
  }
  return Policy(ns, na, std::move(probs));
}

std::vector<double> EvaluatePolicy(const TabularMdp& mdp, const Policy& trained,
                                   const EvalOptions& options, Rng& rng) {
  const Policy exec = ExecutionPolicy(trained, options.agent_eps, options.sampling);
  const double discount =
      options.mode == EvalMode::kDiscounted ? mdp.discount() : 1.0;
  std::vector<double> returns;
  returns.reserve(options.n_episodes);
  for (size_t e = 0; e < options.n_episodes; ++e) {
    const Segment episode = Rollout(mdp, exec, options.cap, rng);
    double total = 0.0;
    double weight = 1.0;
    for (const Transition& t : episode.transitions) {
      total += weight * mdp.R(t.state, t.action, t.next_state);
      weight *= discount;
    }
    returns.push_back(total);
  }
  return returns;
}

ExperimentConfig ExperimentConfig::Table1Preset() {
  ExperimentConfig cfg;
  cfg.mdp = {"gridworld", 0.7};
  cfg.cpl = CplConfig::Preset();
  cfg.n_seeds = cfg.cpl.seeds;
  // Enough pairs to consume every window of the 100 trajectories once.
  cfg.n_pairs = 2500;
  // The post-RLHF agent acts eps-greedily around its learned policy.
  cfg.eval_sampling = EvalSampling::kGreedy;
  return cfg;
}

void ExperimentConfig::Validate() const {
  if (!(mdp.discount >= 0.0 && mdp.discount < 1.0)) {
    BadField("mdp.discount", "must lie in [0, 1)");
  }
  CheckEpsList(agent_eps_list, "agent_eps_list");
  CheckEpsList(labeler_eps_list, "labeler_eps_list");
  if (n_trajectories < 2) BadField("n_trajectories", "must be >= 2");
  if (segment_len == 0) BadField("segment_len", "must be positive");
  if (n_pairs == 0) BadField("n_pairs", "must be positive");
  if (cap == 0) BadField("cap", "must be positive");
  if (label_alpha && !(*label_alpha >= 0.0)) BadField("label_alpha", "must be >= 0");
  if (n_seeds == 0) BadField("n_seeds", "must be positive");
  if (n_eval_episodes == 0) BadField("n_eval_episodes", "must be positive");
  cpl.Validate();
}

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  return {{"mdp", {{"builder", cfg.mdp.builder}, {"discount", cfg.mdp.discount}}},
          {"agent_eps_list", cfg.agent_eps_list},
          {"labeler_eps_list", cfg.labeler_eps_list},
          {"n_trajectories", cfg.n_trajectories},
          {"segment_len", cfg.segment_len},
          {"n_pairs", cfg.n_pairs},
          {"cap", cfg.cap},
          {"label_alpha", AlphaToJson(cfg.LabelAlpha())},
          {"cpl", CplConfigToJson(cfg.cpl)},
          {"n_seeds", cfg.n_seeds},
          {"n_eval_episodes", cfg.n_eval_episodes},
          {"eval_mode", ModeName(cfg.eval_mode)},
          {"eval_sampling", SamplingName(cfg.eval_sampling)},
          {"master_seed", cfg.master_seed}};
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) BadField("config", "expected a JSON object");
  ExperimentConfig cfg = ExperimentConfig::Table1Preset();
  if (j.contains("preset")) {
    const auto name = Get<std::string>(j.at("preset"), "preset");
    if (name != "table1") BadField("preset", "unknown preset '" + name + "'");
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    else if (key == "mdp") cfg.mdp = MdpSpecFromJson(value);
    else if (key == "agent_eps_list") cfg.agent_eps_list = Get<std::vector<double>>(value, key);
    else if (key == "labeler_eps_list") cfg.labeler_eps_list = Get<std::vector<double>>(value, key);
    else if (key == "n_trajectories") cfg.n_trajectories = Get<size_t>(value, key);
    else if (key == "segment_len") cfg.segment_len = Get<size_t>(value, key);
    else if (key == "n_pairs") cfg.n_pairs = Get<size_t>(value, key);
    else if (key == "cap") cfg.cap = Get<size_t>(value, key);
    else if (key == "label_alpha") {
      try {
        cfg.label_alpha = AlphaFromJson(value);
      } catch (const std::exception&) {
        BadField(key, "expected a non-negative number or \"inf\"");
      }
    } else if (key == "cpl") cfg.cpl = CplConfigFromJson(value, cfg.cpl);
    else if (key == "n_seeds") cfg.n_seeds = Get<size_t>(value, key);
    else if (key == "n_eval_episodes") cfg.n_eval_episodes = Get<size_t>(value, key);
    else if (key == "eval_mode") {
      const auto m = Get<std::string>(value, key);
      if (m == "discounted") cfg.eval_mode = EvalMode::kDiscounted;
      else if (m == "undiscounted") cfg.eval_mode = EvalMode::kUndiscounted;
      else BadField(key, "must be discounted or undiscounted");
    } else if (key == "eval_sampling") {
      const auto m = Get<std::string>(value, key);
      if (m == "softmax") cfg.eval_sampling = EvalSampling::kSoftmax;
      else if (m == "greedy") cfg.eval_sampling = EvalSampling::kGreedy;
      else BadField(key, "must be softmax or greedy");
    } else if (key == "master_seed") cfg.master_seed = Get<uint64_t>(value, key);
    else BadField(key, "unknown field");
  }
  cfg.Validate();
  return cfg;
}

std::pair<double, double> MeanAndCi95(const std::vector<double>& samples) {
  if (samples.empty()) return {0.0, 0.0};
  // Shifted sums: constant samples give exactly zero spread.
  const double shift = samples.front();
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x - shift;
  const double mean_dev = sum / n;
  if (samples.size() == 1) return {shift, 0.0};
  double ss = 0.0;
  for (double x : samples) ss += (x - shift - mean_dev) * (x - shift - mean_dev);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {shift + mean_dev, 1.96 * sd / std::sqrt(n)};
}

uint64_t TrainingSeed(uint64_t master, size_t row, size_t seed_index) {
  return DeriveSeed(master, kTrainingDomain + row, seed_index);
}

uint64_t EvalSeed(uint64_t master, size_t cell, size_t seed_index) {
  return DeriveSeed(master, cell, seed_index);
}

MatrixResult RunMatrix(const ExperimentConfig& cfg) {
  cfg.Validate();
  const TabularMdp mdp = cfg.mdp.Build();
  const size_t rows = cfg.labeler_eps_list.size();
  const size_t cols = cfg.agent_eps_list.size();
  const Policy behavior = Policy::Uniform(mdp.n_states(), mdp.n_actions());
  DatasetOptions data_options;
  data_options.n_trajectories = cfg.n_trajectories;
  data_options.segment_len = cfg.segment_len;
  data_options.n_pairs = cfg.n_pairs;
  data_options.alpha = cfg.LabelAlpha();
  data_options.cap = cfg.cap;

  // One trained policy per (labeler row, seed), shared by every agent column.
  std::vector<std::optional<Policy>> trained(rows * cfg.n_seeds);
  std::vector<std::string> errors(trained.size());
  const auto n_train = static_cast<std::ptrdiff_t>(trained.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t task = 0; task < n_train; ++task) {
    const size_t row = static_cast<size_t>(task) / cfg.n_seeds;
    const size_t seed = static_cast<size_t>(task) % cfg.n_seeds;
    try {
      const uint64_t data_seed = TrainingSeed(cfg.master_seed, row, seed);
      const PreferenceDataset dataset = GenerateDataset(
          mdp, behavior, BeliefSpec::EpsGreedyClass(cfg.labeler_eps_list[row]),
          data_options, data_seed, cfg.mdp.builder);
      Rng train_rng(DeriveSeed(data_seed, 1));
      trained[static_cast<size_t>(task)] =
          TrainCpl(dataset.pairs, mdp.n_states(), mdp.n_actions(), cfg.cpl,
                   train_rng)
              .policy;
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(task)] =
          "cell (labeler_eps=" + FormatNumber(cfg.labeler_eps_list[row]) +
          ", seed " + std::to_string(seed) + "): " + e.what();
    }
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }

  MatrixResult result;
  result.n_rows = rows;
  result.n_cols = cols;
  result.cells.resize(rows * cols);
  const auto n_cells = static_cast<std::ptrdiff_t>(rows * cols);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < n_cells; ++c) {
    const size_t cell = static_cast<size_t>(c);
    const size_t row = cell / cols;
    const size_t col = cell % cols;
    EvalOptions eval;
    eval.agent_eps = cfg.agent_eps_list[col];
    eval.n_episodes = cfg.n_eval_episodes;
    eval.mode = cfg.eval_mode;
    eval.sampling = cfg.eval_sampling;
    eval.cap = cfg.cap;
    std::vector<double> pooled;
    pooled.reserve(cfg.n_seeds * cfg.n_eval_episodes);
    for (size_t seed = 0; seed < cfg.n_seeds; ++seed) {
      Rng rng(EvalSeed(cfg.master_seed, cell, seed));
      const auto returns =
          EvaluatePolicy(mdp, *trained[row * cfg.n_seeds + seed], eval, rng);
      pooled.insert(pooled.end(), returns.begin(), returns.end());
    }
    const auto [mean, ci] = MeanAndCi95(pooled);
    result.cells[cell] = {cfg.agent_eps_list[col], cfg.labeler_eps_list[row],
                          mean, ci, pooled.size()};
  }
  return result;
}

void WriteMatrixCsv(const MatrixResult& result, std::ostream& out) {
  out << "agent_eps,labeler_eps,mean_return,ci95,n_samples\n";
  for (const MatrixCell& c : result.cells) {
    out << FormatNumber(c.agent_eps) << ',' << FormatNumber(c.labeler_eps)
        << ',' << FormatNumber(c.mean_return) << ','
        << FormatNumber(c.ci95_halfwidth) << ',' << c.n_samples << '\n';
  }
}

nlohmann::json MatrixMetadataJson(const ExperimentConfig& cfg,
                                  const MatrixResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const MatrixCell& c : result.cells) {
    cells.push_back({{"agent_eps", c.agent_eps},
                     {"labeler_eps", c.labeler_eps},
                     {"mean_return", c.mean_return},
                     {"ci95", c.ci95_halfwidth},
                     {"n_samples", c.n_samples}});
  }
  return {{"config", ExperimentConfigToJson(cfg)},
          {"behavior_policy", "uniform"},
          {"belief", "eps_greedy_class(labeler_eps)"},
          {"cpl_initialization", "zero logits"},
          {"seed_derivation",
           "training/data seed = DeriveSeed(master, 0x747261696e000000 + row, "
           "seed); eval seed = DeriveSeed(master, cell, seed); "
           "cell = row * n_cols + col"},
          {"rows", "labeler_eps"},
          {"cols", "agent_eps"},
          {"cells", std::move(cells)}};
}

void BoundSweepConfig::Validate() const {
  for (double d : deltas) {
    if (!std::isfinite(d) || d < 0.0) BadField("deltas", "must be finite and >= 0");
  }
  if (n_pairs > kMaxEnumeratedPairs) {
    BadField("n_pairs", "must be <= " + std::to_string(kMaxEnumeratedPairs));
  }
  if (!(same_state_fraction >= 0.0 && same_state_fraction <= 1.0)) {
    BadField("same_state_fraction", "must lie in [0, 1]");
  }
  const RandomMdpOptions& o = random_mdp;
  if (o.min_states < 1 || o.max_states < o.min_states) {
    BadField("random_mdp.max_states", "state range is empty");
  }
  if (o.min_actions < 1 || o.max_actions < o.min_actions || o.max_actions > 32) {
    BadField("random_mdp.max_actions", "action range must lie in [1, 32]");
  }
  if (!(o.min_discount >= 0.0 && o.max_discount < 1.0 &&
        o.min_discount <= o.max_discount)) {
    BadField("random_mdp.max_discount", "discount range must lie in [0, 1)");
  }
  if (!(o.terminal_probability >= 0.0 && o.terminal_probability <= 1.0)) {
    BadField("random_mdp.terminal_probability", "must lie in [0, 1]");
  }
  if (o.max_successors < 1) BadField("random_mdp.max_successors", "must be >= 1");
}

nlohmann::json BoundSweepConfigToJson(const BoundSweepConfig& cfg) {
  const RandomMdpOptions& o = cfg.random_mdp;
  return {{"n_instances", cfg.n_instances},
          {"deltas", cfg.deltas},
          {"n_pairs", cfg.n_pairs},
          {"same_state_fraction", cfg.same_state_fraction},
          {"random_mdp",
           {{"min_states", o.min_states},
            {"max_states", o.max_states},
            {"min_actions", o.min_actions},
            {"max_actions", o.max_actions},
            {"min_discount", o.min_discount},
            {"max_discount", o.max_discount},
            {"reward_scale", o.reward_scale},
            {"terminal_probability", o.terminal_probability},
            {"max_successors", o.max_successors}}},
          {"joint_instances", cfg.joint_instances},
          {"joint_perturbations", cfg.joint_perturbations},
          {"master_seed", cfg.master_seed}};
}

BoundSweepConfig BoundSweepConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) BadField("config", "expected a JSON object");
  BoundSweepConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_instances") cfg.n_instances = Get<size_t>(value, key);
    else if (key == "deltas") cfg.deltas = Get<std::vector<double>>(value, key);
    else if (key == "n_pairs") cfg.n_pairs = Get<size_t>(value, key);
    else if (key == "same_state_fraction") cfg.same_state_fraction = Get<double>(value, key);
    else if (key == "random_mdp") cfg.random_mdp = RandomMdpOptionsFromJson(value);
    else if (key == "joint_instances") cfg.joint_instances = Get<size_t>(value, key);
    else if (key == "joint_perturbations") cfg.joint_perturbations = Get<size_t>(value, key);
    else if (key == "master_seed") cfg.master_seed = Get<uint64_t>(value, key);
    else BadField(key, "unknown field");
  }
  cfg.Validate();
  return cfg;
}

size_t BoundSweepResult::SingleHolds() const {
  size_t n = 0;
  for (const auto& r : single_rows) n += r.report.holds ? 1 : 0;
  return n;
}

size_t BoundSweepResult::JointHolds() const {
  size_t n = 0;
  for (const auto& r : joint_rows) n += r.report.holds ? 1 : 0;
  return n;
}

namespace {

struct BoundInstance {
  TabularMdp mdp;
  std::vector<PreferencePair> pairs;
  BestPostPolicy best;
  std::vector<size_t> live_states;
};

BoundInstance MakeBoundInstance(const BoundSweepConfig& cfg, Rng& rng) {
  TabularMdp mdp = RandomMdp(cfg.random_mdp, rng);
  auto pairs = RandomSingleTransitionPairs(mdp, cfg.n_pairs,
                                           cfg.same_state_fraction, rng);
  BestPostPolicy best = FindBestPostPolicy(mdp, pairs);
  std::vector<size_t> live;
  for (size_t s = 0; s < mdp.n_states(); ++s) {
    if (!mdp.IsTerminal(s)) live.push_back(s);
  }
  return {std::move(mdp), std::move(pairs), std::move(best), std::move(live)};
}

double RandomSign(Rng& rng) { return rng.Bernoulli(0.5) ? 1.0 : -1.0; }

}  // namespace

BoundSweepResult RunBoundSweep(const BoundSweepConfig& cfg) {
  cfg.Validate();
  BoundSweepResult result;
  if (cfg.deltas.empty()) return result;

  std::vector<std::vector<BoundRow>> single(cfg.n_instances);
  std::vector<std::optional<BoundRow>> joint(cfg.joint_instances);
  std::vector<std::string> errors(cfg.n_instances + cfg.joint_instances);
  const auto n_tasks = static_cast<std::ptrdiff_t>(errors.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < n_tasks; ++t) {
    const size_t task = static_cast<size_t>(t);
    const bool is_single = task < cfg.n_instances;
    const size_t instance = is_single ? task : task - cfg.n_instances;
    try {
      Rng rng(DeriveSeed(cfg.master_seed, is_single ? 1 : 2, instance));
      const BoundInstance inst = MakeBoundInstance(cfg, rng);
      const size_t na = inst.mdp.n_actions();
      if (is_single) {
        std::vector<Perturbation> perturbations;
        for (double delta : cfg.deltas) {
          const size_t s = inst.live_states[rng.UniformInt(inst.live_states.size())];
          perturbations.push_back({s, rng.UniformInt(na), RandomSign(rng) * delta});
        }
        const auto reports = VerifySingleDisagreements(inst.mdp, inst.pairs,
                                            inst.best.belief_q, perturbations);
        for (size_t i = 0; i < reports.size(); ++i) {
          single[task].push_back({instance, {perturbations[i]}, reports[i]});
        }
      } else {
        // One disagreement per state; see the README on same-state pairs.
        std::vector<size_t> states = inst.live_states;
        rng.Shuffle(std::span<size_t>(states));
        const size_t k = std::min(cfg.joint_perturbations, states.size());
        std::vector<Perturbation> perturbations;
        for (size_t i = 0; i < k; ++i) {
          const double delta = cfg.deltas[rng.UniformInt(cfg.deltas.size())];
          perturbations.push_back({states[i], rng.UniformInt(na), RandomSign(rng) * delta});
        }
        joint[instance] = BoundRow{
            instance, perturbations,
            VerifyJointDisagreements(inst.mdp, inst.pairs, inst.best.belief_q, perturbations)};
      }
    } catch (const std::exception& e) {
      errors[task] = std::string(is_single ? "single" : "joint") +
                     " instance " + std::to_string(instance) + ": " + e.what();
    }
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  for (auto& rows : single) {
    for (auto& row : rows) result.single_rows.push_back(std::move(row));
  }
  for (auto& row : joint) {
    if (row) result.joint_rows.push_back(std::move(*row));
  }
  return result;
}

void WriteBoundCsv(const std::vector<BoundRow>& rows, std::ostream& out) {
  out << "instance,state,action,delta,j_star,j_delta,bound_value,holds\n";
  for (const BoundRow& row : rows) {
    std::string states, actions, deltas;
    for (size_t i = 0; i < row.perturbations.size(); ++i) {
      const char* sep = i == 0 ? "" : ";";
      states += sep + std::to_string(row.perturbations[i].state);
      actions += sep + std::to_string(row.perturbations[i].action);
      deltas += sep + FormatNumber(row.perturbations[i].delta);
    }
    out << row.instance << ',' << states << ',' << actions << ',' << deltas
        << ',' << FormatNumber(row.report.j_star) << ','
        << FormatNumber(row.report.j_delta) << ','
        << FormatNumber(row.report.bound_value) << ','
        << (row.report.holds ? "true" : "false") << '\n';
  }
}

nlohmann::json BoundSummaryJson(const BoundSweepConfig& cfg,
                                const BoundSweepResult& result) {
  double min_slack = 0.0;
  bool first = true;
  for (const auto& r : result.single_rows) {
    const double slack = r.report.j_delta - r.report.bound_value;
    if (first || slack < min_slack) min_slack = slack;
    first = false;
  }
  size_t flips = 0;
  for (const auto& r : result.single_rows) flips += r.report.j_delta != r.report.j_star;
  return {{"config", BoundSweepConfigToJson(cfg)},
          {"single", {{"rows", result.single_rows.size()},
                       {"holds", result.SingleHolds()},
                       {"policy_changed", flips},
                       {"min_slack", min_slack}}},
          {"joint", {{"rows", result.joint_rows.size()},
                         {"holds", result.JointHolds()}}}};
}

}  // namespace beliefrl
