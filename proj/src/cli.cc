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

#include "beliefrl/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "beliefrl/bounds.h"
#include "beliefrl/cpl.h"
#include "beliefrl/experiment.h"
#include "beliefrl/mdp.h"
#include "beliefrl/preferences.h"
#include "beliefrl/rng.h"
#include "beliefrl/solvers.h"
#include "beliefrl/stats.h"
#include "json.hpp"

namespace beliefrl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for bad configs; maps to the validation exit code.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CommonFlags {
  std::string config;
  std::string out_dir = ".";
  std::optional<uint64_t> seed;
  std::string format = "json";
};

struct Context {
  CommonFlags flags;
  json config = json::object();
  fs::path config_dir = ".";
  std::ostream* out = nullptr;
};

json LoadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: invalid JSON in '" + path.string() +
                          "': " + e.what());
  }
}

fs::path ResolvePath(const Context& ctx, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : ctx.config_dir / path;
}

std::ofstream OpenOutput(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.flags.out_dir);
  const fs::path path = fs::path(ctx.flags.out_dir) / name;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
  return file;
}

void WriteJsonFile(const Context& ctx, const std::string& name, const json& j) {
  auto file = OpenOutput(ctx, name);
  file << j.dump(2) << '\n';
}

// Strict object reader for the small per-subcommand configs.
class Fields {
 public:
  explicit Fields(const json& j) : j_(j) {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    seen_.push_back(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(key + ": wrong type");
    }
  }

  const json* Raw(const std::string& key) {
    seen_.push_back(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string Require(const std::string& key) {
    if (!j_.contains(key)) throw ValidationError(key + ": required");
    return Get<std::string>(key, "");
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ValidationError(key + ": unknown field");
      }
    }
  }

 private:
  const json& j_;
  std::vector<std::string> seen_;
};

TabularMdp MdpFromConfig(Fields& fields) {
  MdpSpec spec;
  if (const json* m = fields.Raw("mdp")) {
    spec = MdpSpecFromJson(*m);
  }
  return spec.Build();
}

EvalMode ParseMode(const std::string& s) {
  if (s == "discounted") return EvalMode::kDiscounted;
  if (s == "undiscounted") return EvalMode::kUndiscounted;
  throw ValidationError("eval_mode: must be discounted or undiscounted");
}

EvalSampling ParseSampling(const std::string& s) {
  if (s == "softmax") return EvalSampling::kSoftmax;
  if (s == "greedy") return EvalSampling::kGreedy;
  throw ValidationError("eval_sampling: must be softmax or greedy");
}

void WriteTablesCsv(const ValueTables& t, std::ostream& out) {
  out << "state,action,q,v,adv\n";
  for (size_t s = 0; s < t.n_states; ++s) {
    for (size_t a = 0; a < t.n_actions; ++a) {
      out << s << ',' << a << ',' << FormatNumber(t.Q(s, a)) << ','
          << FormatNumber(t.v[s]) << ',' << FormatNumber(t.A(s, a)) << '\n';
    }
  }
}

int RunSolve(Context& ctx) {
  Fields f(ctx.config);
  const TabularMdp mdp = MdpFromConfig(f);
  BeliefSpec belief;
  if (const json* b = f.Raw("belief")) belief = BeliefSpecFromJson(*b);
  const double tol = f.Get<double>("tol", kDefaultTol);
  f.Finish();
  const ValueTables tables = BeliefTables(mdp, belief, tol);
  if (ctx.flags.format == "csv") {
    auto file = OpenOutput(ctx, "values.csv");
    WriteTablesCsv(tables, file);
  } else {
    WriteJsonFile(ctx, "values.json",
                  {{"belief", BeliefSpecToJson(belief)},
                   {"tables", ValueTablesToJson(tables)},
                   {"greedy_policy", PolicyToJson(GreedyPolicy(tables))}});
  }
  *ctx.out << "solved " << mdp.n_states() << " states, v(start) = "
           << FormatNumber(ExpectedReturn(mdp, GreedyPolicy(tables))) << '\n';
  return kExitOk;
}

int RunGenPrefs(Context& ctx) {
  Fields f(ctx.config);
  const json* mdp_json = f.Raw("mdp");
  const std::string builder =
      mdp_json && mdp_json->contains("builder")
          ? mdp_json->at("builder").get<std::string>()
          : MdpSpec{}.builder;
  const TabularMdp mdp = MdpFromConfig(f);
  BeliefSpec belief;
  if (const json* b = f.Raw("belief")) belief = BeliefSpecFromJson(*b);
  DatasetOptions opt;
  opt.n_trajectories = f.Get<size_t>("n_trajectories", opt.n_trajectories);
  opt.segment_len = f.Get<size_t>("segment_len", opt.segment_len);
  opt.n_pairs = f.Get<size_t>("n_pairs", opt.n_pairs);
  opt.cap = f.Get<size_t>("cap", opt.cap);
  if (const json* a = f.Raw("alpha")) {
    try {
      opt.alpha = AlphaFromJson(*a);
    } catch (const std::exception&) {
      throw ValidationError("alpha: expected a non-negative number or \"inf\"");
    }
  }
  const auto behavior = f.Get<std::string>("behavior", "uniform");
  if (behavior != "uniform") throw ValidationError("behavior: only 'uniform' is supported");
  uint64_t seed = f.Get<uint64_t>("seed", 0);
  f.Finish();
  if (ctx.flags.seed) seed = *ctx.flags.seed;
  if (opt.n_trajectories == 0) throw ValidationError("n_trajectories: must be positive");
  if (opt.segment_len == 0) throw ValidationError("segment_len: must be positive");
  if (opt.n_pairs == 0) throw ValidationError("n_pairs: must be positive");

  const PreferenceDataset ds = GenerateDataset(
      mdp, Policy::Uniform(mdp.n_states(), mdp.n_actions()), belief, opt, seed,
      builder);
  auto file = OpenOutput(ctx, "dataset.jsonl");
  WriteDatasetJsonl(ds, file);
  *ctx.out << "wrote " << ds.pairs.size() << " pairs\n";
  return kExitOk;
}

int RunTrain(Context& ctx) {
  Fields f(ctx.config);
  const TabularMdp mdp = MdpFromConfig(f);
  const std::string dataset_path = f.Require("dataset");
  CplConfig cpl = CplConfig::Preset();
  if (const json* c = f.Raw("cpl")) cpl = CplConfigFromJson(*c, cpl);
  uint64_t seed = f.Get<uint64_t>("seed", 0);
  f.Finish();
  if (ctx.flags.seed) seed = *ctx.flags.seed;

  std::ifstream in(ResolvePath(ctx, dataset_path));
  if (!in) throw ValidationError("dataset: cannot open '" + dataset_path + "'");
  const PreferenceDataset ds = ReadDatasetJsonl(in);
  Rng rng(seed);
  const CplTrainingResult result =
      TrainCpl(ds.pairs, mdp.n_states(), mdp.n_actions(), cpl, rng);
  WriteJsonFile(ctx, "policy.json",
                {{"cpl", CplConfigToJson(cpl)},
                 {"seed", seed},
                 {"params", SoftmaxParamsToJson(result.params)},
                 {"policy", PolicyToJson(result.policy)}});
  auto curve = OpenOutput(ctx, "loss_curve.csv");
  WriteLossCurveCsv(result.loss_curve, curve);
  *ctx.out << "final loss " << FormatNumber(result.loss_curve.back()) << '\n';
  return kExitOk;
}

int RunEval(Context& ctx) {
  Fields f(ctx.config);
  const TabularMdp mdp = MdpFromConfig(f);
  const std::string policy_path = f.Require("policy");
  EvalOptions opt;
  opt.agent_eps = f.Get<double>("agent_eps", opt.agent_eps);
  opt.n_episodes = f.Get<size_t>("n_episodes", opt.n_episodes);
  opt.cap = f.Get<size_t>("cap", opt.cap);
  opt.mode = ParseMode(f.Get<std::string>("eval_mode", "discounted"));
  opt.sampling = ParseSampling(f.Get<std::string>("eval_sampling", "softmax"));
  uint64_t seed = f.Get<uint64_t>("seed", 0);
  f.Finish();
  if (ctx.flags.seed) seed = *ctx.flags.seed;
  if (!(opt.agent_eps >= 0.0 && opt.agent_eps <= 1.0)) {
    throw ValidationError("agent_eps: must lie in [0, 1]");
  }
  if (opt.n_episodes == 0) throw ValidationError("n_episodes: must be positive");

  const json pj = LoadJsonFile(ResolvePath(ctx, policy_path));
  const Policy policy = PolicyFromJson(pj.contains("policy") ? pj.at("policy") : pj);
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
    throw ValidationError("policy: shape does not match the MDP");
  }
  Rng rng(seed);
  const std::vector<double> returns = EvaluatePolicy(mdp, policy, opt, rng);
  const auto [mean, ci] = MeanAndCi95(returns);
  if (ctx.flags.format == "csv") {
    auto file = OpenOutput(ctx, "returns.csv");
    file << "episode,return\n";
    for (size_t i = 0; i < returns.size(); ++i) {
      file << i << ',' << FormatNumber(returns[i]) << '\n';
    }
  } else {
    WriteJsonFile(ctx, "eval.json",
                  {{"mean_return", mean}, {"ci95", ci},
                   {"n_samples", returns.size()}, {"seed", seed}});
  }
  *ctx.out << "mean return " << FormatNumber(mean) << " +/- " << FormatNumber(ci) << '\n';
  return kExitOk;
}

int RunTable1(Context& ctx) {
  ExperimentConfig cfg = ctx.flags.config.empty()
                             ? ExperimentConfig::Table1Preset()
                             : ExperimentConfigFromJson(ctx.config);
  if (ctx.flags.seed) cfg.master_seed = *ctx.flags.seed;
  const MatrixResult result = RunMatrix(cfg);
  {
    auto file = OpenOutput(ctx, "matrix.csv");
    WriteMatrixCsv(result, file);
  }
  WriteJsonFile(ctx, "metadata.json", MatrixMetadataJson(cfg, result));
  *ctx.out << "labeler_eps \\ agent_eps";
  for (double e : cfg.agent_eps_list) *ctx.out << '\t' << FormatNumber(e);
  *ctx.out << '\n';
  for (size_t r = 0; r < result.n_rows; ++r) {
    *ctx.out << FormatNumber(cfg.labeler_eps_list[r]);
    for (size_t c = 0; c < result.n_cols; ++c) {
      const MatrixCell& cell = result.At(r, c);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "\t%.2f +/- %.2f", cell.mean_return,
                    cell.ci95_halfwidth);
      *ctx.out << buf;
    }
    *ctx.out << '\n';
  }
  return kExitOk;
}

int RunVerifyBound(Context& ctx) {
  BoundSweepConfig cfg = ctx.flags.config.empty()
                             ? BoundSweepConfig{}
                             : BoundSweepConfigFromJson(ctx.config);
  if (ctx.flags.seed) cfg.master_seed = *ctx.flags.seed;
  const BoundSweepResult result = RunBoundSweep(cfg);
  {
    auto file = OpenOutput(ctx, "bound.csv");
    WriteBoundCsv(result.single_rows, file);
  }
  {
    auto file = OpenOutput(ctx, "bound_joint.csv");
    WriteBoundCsv(result.joint_rows, file);
  }
  WriteJsonFile(ctx, "summary.json", BoundSummaryJson(cfg, result));
  *ctx.out << "single disagreements: " << result.SingleHolds() << '/'
           << result.single_rows.size() << " hold; joint: "
           << result.JointHolds() << '/' << result.joint_rows.size()
           << " hold\n";
  return kExitOk;
}

int RunCaseStudy(Context& ctx, double p_lose, double discount) {
  if (!(p_lose >= 0.0 && p_lose <= 1.0)) {
    throw ValidationError("p-lose: must lie in [0, 1]");
  }
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw ValidationError("discount: must lie in [0, 1)");
  }
  const CaseStudyFlip flip = EvaluateCaseStudyFlip(p_lose, discount);
  const json report = {{"p_lose", p_lose},
                       {"discount", discount},
                       {"preferred", FlipOutcomeName(flip.preferred)},
                       {"gap", flip.gap}};
  if (ctx.flags.out_dir != ".") {
    if (ctx.flags.format == "csv") {
      auto file = OpenOutput(ctx, "case_study.csv");
      file << "p_lose,discount,preferred,gap\n"
           << FormatNumber(p_lose) << ',' << FormatNumber(discount) << ','
           << FlipOutcomeName(flip.preferred) << ',' << FormatNumber(flip.gap)
           << '\n';
    } else {
      WriteJsonFile(ctx, "case_study.json", report);
    }
  }
  *ctx.out << "preferred: " << FlipOutcomeName(flip.preferred)
           << " (risk - safe score gap " << FormatNumber(flip.gap) << ")\n";
  return kExitOk;
}

int RunStats(Context& ctx) {
  Fields f(ctx.config);
  const std::string csv = f.Require("csv");
  const bool tie_correction = f.Get<bool>("tie_correction", true);
  const auto exclude = f.Get<std::vector<std::string>>("exclude_participants", {});
  f.Finish();
  stats::RowFilter keep = nullptr;
  if (!exclude.empty()) {
    keep = [&exclude](const stats::LikertRow& row) {
      return std::find(exclude.begin(), exclude.end(), row.participant_id) ==
             exclude.end();
    };
  }
  const stats::IngestReport ingest =
      stats::IngestLikertCsvFile(ResolvePath(ctx, csv).string(), keep);
  const auto kw = stats::KruskalWallis(ingest.data, tie_correction);
  const auto dunn = stats::DunnBonferroni(ingest.data, tie_correction);
  if (ctx.flags.format == "csv") {
    auto file = OpenOutput(ctx, "stats.csv");
    stats::WritePairwiseCsv(ingest.data, dunn, file);
  } else {
    json report = stats::StatsReportJson(ingest.data, kw, dunn);
    report["rows_read"] = ingest.rows_read;
    report["rows_excluded"] = ingest.rows_excluded;
    WriteJsonFile(ctx, "stats.json", report);
  }
  stats::WriteStatsTable(ingest.data, kw, dunn, *ctx.out);
  return kExitOk;
}

}  // namespace

int CliDispatch(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Belief-based preference lab for tabular MDPs", "beliefrl"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Context ctx;
  ctx.out = &out;
  double p_lose = 0.5;
  double discount = 0.7;
  std::string chosen;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "Solve an MDP for the value tables of a belief"},
      {"gen-prefs", "Generate a labeled preference dataset"},
      {"train", "Train a CPL policy on a dataset"},
      {"eval", "Evaluate a trained policy with eps-noise"},
      {"table1", "Run the belief-mismatch matrix"},
      {"verify-bound", "Check the disagreement bound on random MDPs"},
      {"case-study", "Report which segment the labeler prefers"},
      {"stats", "Kruskal-Wallis, Dunn and Cliff's delta on Likert data"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", ctx.flags.config, "JSON config file");
    sub->add_option("--out", ctx.flags.out_dir, "Output directory");
    sub->add_option("--seed", ctx.flags.seed, "Seed override");
    sub->add_option("--format", ctx.flags.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    if (name == "case-study") {
      sub->add_option("--p-lose", p_lose, "Believed probability of a_lose");
      sub->add_option("--discount", discount, "Discount factor");
    }
    sub->final_callback([&chosen, n = name] { chosen = n; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (!ctx.flags.config.empty()) {
      ctx.config = LoadJsonFile(ctx.flags.config);
      ctx.config_dir = fs::path(ctx.flags.config).parent_path();
      if (ctx.config_dir.empty()) ctx.config_dir = ".";
    }
    if (chosen == "solve") return RunSolve(ctx);
    if (chosen == "gen-prefs") return RunGenPrefs(ctx);
    if (chosen == "train") return RunTrain(ctx);
    if (chosen == "eval") return RunEval(ctx);
    if (chosen == "table1") return RunTable1(ctx);
    if (chosen == "verify-bound") return RunVerifyBound(ctx);
    if (chosen == "case-study") return RunCaseStudy(ctx, p_lose, discount);
    if (chosen == "stats") return RunStats(ctx);
    err << app.help();
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace beliefrl
