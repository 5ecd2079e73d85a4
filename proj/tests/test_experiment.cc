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
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "beliefrl/cli.h"
#include "beliefrl/experiment.h"
#include "beliefrl/stats.h"
#include "doctest.h"
#include "json.hpp"

namespace beliefrl {
namespace {

namespace fs = std::filesystem;

const fs::path kSourceDir = BELIEFRL_SOURCE_DIR;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path ScratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("beliefrl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void WriteJson(const fs::path& p, const nlohmann::json& j) {
  std::ofstream(p) << j.dump(2);
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = CliDispatch(args, out, err);
  return {code, out.str(), err.str()};
}

ExperimentConfig TinyMatrix() {
  ExperimentConfig cfg = ExperimentConfig::Table1Preset();
  cfg.agent_eps_list = {0.0, 0.5};
  cfg.labeler_eps_list = {0.0, 0.3};
  cfg.n_pairs = 200;
  cfg.n_trajectories = 20;
  cfg.n_seeds = 2;
  cfg.n_eval_episodes = 5;
  cfg.master_seed = 17;
  return cfg;
}

TEST_CASE("matrix layout, sample counts and determinism") {
  const ExperimentConfig cfg = TinyMatrix();
  const MatrixResult a = RunMatrix(cfg);
  REQUIRE(a.n_rows == 2);
  REQUIRE(a.n_cols == 2);
  CHECK(a.At(1, 0).labeler_eps == 0.3);
  CHECK(a.At(1, 0).agent_eps == 0.0);
  for (const MatrixCell& c : a.cells) {
    CHECK(c.n_samples == 10);
    CHECK(c.ci95_halfwidth >= 0.0);
  }
  const MatrixResult b = RunMatrix(cfg);
  std::ostringstream sa, sb;
  WriteMatrixCsv(a, sa);
  WriteMatrixCsv(b, sb);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("agent_eps,labeler_eps,mean_return,ci95,n_samples\n", 0) == 0);
}

TEST_CASE("single sample gives a zero interval") {
  ExperimentConfig cfg = TinyMatrix();
  cfg.n_seeds = 1;
  cfg.n_eval_episodes = 1;
  for (const MatrixCell& c : RunMatrix(cfg).cells) {
    CHECK(c.n_samples == 1);
    CHECK(c.ci95_halfwidth == 0.0);
  }
  CHECK(MeanAndCi95({2.0, 2.0, 2.0}).second == 0.0);
  const auto [mean, ci] = MeanAndCi95({1.0, 3.0});
  CHECK(mean == 2.0);
  CHECK(ci == doctest::Approx(1.96 * std::sqrt(2.0) / std::sqrt(2.0)));
}

TEST_CASE("execution policy mixes eps noise into the trained policy") {
  const Policy trained(1, 4, {0.1, 0.6, 0.2, 0.1});
  const Policy soft = ExecutionPolicy(trained, 0.2, EvalSampling::kSoftmax);
  CHECK(soft(0, 1) == doctest::Approx(0.8 * 0.6 + 0.05));
  const Policy greedy = ExecutionPolicy(trained, 0.2, EvalSampling::kGreedy);
  CHECK(greedy(0, 1) == doctest::Approx(0.85));
  CHECK(greedy(0, 0) == doctest::Approx(0.05));
}

TEST_CASE("experiment config json is strict and names fields") {
  const ExperimentConfig preset = ExperimentConfig::Table1Preset();
  CHECK(preset.agent_eps_list == std::vector<double>{0.0, 0.1, 0.3, 0.5});
  CHECK(preset.n_trajectories == 100);
  CHECK(preset.n_seeds == 20);
  CHECK(preset.mdp.discount == 0.7);

  const auto round = ExperimentConfigFromJson(ExperimentConfigToJson(preset));
  CHECK(ExperimentConfigToJson(round) == ExperimentConfigToJson(preset));

  const std::map<std::string, nlohmann::json> bad = {
      {"agent_eps_list", {{"agent_eps_list", {0.0, 1.5}}}},
      {"n_seeds", {{"n_seeds", 0}}},
      {"mystery", {{"mystery", 1}}},
      {"mdp.builder", {{"mdp", {{"builder", "maze"}}}}},
      {"eval_mode", {{"eval_mode", "sometimes"}}},
      {"cpl.learning_rate", {{"cpl", {{"learning_rate", 0.0}}}}},
      {"preset", {{"preset", "table9"}}},
  };
  for (const auto& [field, j] : bad) {
    CAPTURE(field);
    try {
      ExperimentConfigFromJson(j);
      FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  }

  const auto file = nlohmann::json::parse(ReadFile(kSourceDir / "presets/table1.json"));
  CHECK(ExperimentConfigToJson(ExperimentConfigFromJson(file)) ==
        ExperimentConfigToJson(preset));
}

TEST_CASE("bound sweep") {
  const BoundSweepConfig cfg;
  const BoundSweepResult r = RunBoundSweep(cfg);
  CHECK(r.single_rows.size() == 200);
  CHECK(r.SingleHolds() == 200);
  CHECK(r.joint_rows.size() == 50);
  CHECK(r.JointHolds() == 50);
  std::ostringstream a, b;
  WriteBoundCsv(r.single_rows, a);
  WriteBoundCsv(RunBoundSweep(cfg).single_rows, b);
  CHECK(a.str() == b.str());

  BoundSweepConfig empty = cfg;
  empty.deltas.clear();
  const BoundSweepResult none = RunBoundSweep(empty);
  CHECK(none.single_rows.empty());
  CHECK(none.joint_rows.empty());

  BoundSweepConfig too_many = cfg;
  too_many.n_pairs = kMaxEnumeratedPairs + 1;
  CHECK_THROWS_AS(too_many.Validate(), std::invalid_argument);
  CHECK_THROWS_AS(BoundSweepConfigFromJson({{"deltas", {-1.0}}}), std::invalid_argument);
  const auto file = nlohmann::json::parse(ReadFile(kSourceDir / "presets/bound_sweep.json"));
  CHECK(BoundSweepConfigToJson(BoundSweepConfigFromJson(file)) == BoundSweepConfigToJson(cfg));
}

TEST_CASE("cli usage errors") {
  const CliRun none = Cli({});
  CHECK(none.code == kExitValidation);
  CHECK(none.err.find("Usage") != std::string::npos);
  const CliRun unknown = Cli({"frobnicate"});
  CHECK(unknown.code == kExitValidation);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  const CliRun flag = Cli({"case-study", "--bogus"});
  CHECK(flag.code == kExitValidation);
  CHECK(flag.err.find("Usage") != std::string::npos);
  CHECK(Cli({"case-study", "--format", "xml"}).code == kExitValidation);
  CHECK(Cli({"table1", "--config", "/nonexistent/config.json"}).code == kExitValidation);
}

TEST_CASE("cli validation names the offending field") {
  const fs::path dir = ScratchDir("validation");
  WriteJson(dir / "bad.json", {{"n_trajectories", 0}});
  const CliRun r = Cli({"table1", "--config", (dir / "bad.json").string(),
                        "--out", (dir / "out").string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("n_trajectories") != std::string::npos);
  const CliRun p = Cli({"case-study", "--p-lose", "2"});
  CHECK(p.code == kExitValidation);
  CHECK(p.err.find("p-lose") != std::string::npos);
}

TEST_CASE("cli data and io failures") {
  const fs::path dir = ScratchDir("runtime");
  WriteJson(dir / "gen.json", {{"mdp", {{"builder", "case_study"}, {"discount", 0.9}}},
                               {"segment_len", 5}, {"cap", 2}});
  const CliRun r = Cli({"gen-prefs", "--config", (dir / "gen.json").string(),
                        "--out", dir.string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("segment_len") != std::string::npos);

  std::ofstream(dir / "garbage.jsonl") << "{\"type\": \"header\"}\nnot json\n";
  WriteJson(dir / "train.json", {{"dataset", "garbage.jsonl"}});
  const CliRun t = Cli({"train", "--config", (dir / "train.json").string(),
                        "--out", dir.string()});
  CHECK(t.code == kExitValidation);

  // An output directory that cannot be created is a runtime failure.
  std::ofstream(dir / "blocker") << "x";
  const CliRun io = Cli({"case-study", "--out", (dir / "blocker" / "sub").string()});
  CHECK(io.code == kExitRuntime);
  CHECK(!io.err.empty());
}

TEST_CASE("cli case study reports the tie") {
  const CliRun r = Cli({"case-study", "--p-lose", "0.5"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("tie") != std::string::npos);
  const CliRun risk = Cli({"case-study", "--p-lose", "0.2", "--discount", "0.9"});
  CHECK(risk.out.find("risk") != std::string::npos);
}

TEST_CASE("cli table1 writes the matrix and metadata") {
  const fs::path dir = ScratchDir("table1");
  nlohmann::json cfg = ExperimentConfigToJson(TinyMatrix());
  WriteJson(dir / "cfg.json", cfg);
  const fs::path out = dir / "results";
  const CliRun r = Cli({"table1", "--config", (dir / "cfg.json").string(),
                        "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(out / "matrix.csv"));
  const auto meta = nlohmann::json::parse(ReadFile(out / "metadata.json"));
  CHECK(meta.at("config") == ExperimentConfigToJson(TinyMatrix()));
  CHECK(meta.at("cells").size() == 4);

  const CliRun seeded = Cli({"table1", "--config", (dir / "cfg.json").string(),
                             "--out", (dir / "seeded").string(), "--seed", "99"});
  REQUIRE(seeded.code == kExitOk);
  const auto seeded_meta = nlohmann::json::parse(ReadFile(dir / "seeded/metadata.json"));
  CHECK(seeded_meta.at("config").at("master_seed") == 99);
}

TEST_CASE("cli stats on the fixture matches the toolkit") {
  const fs::path dir = ScratchDir("stats");
  const CliRun r = Cli({"stats", "--config", (kSourceDir / "fixtures/likert.json").string(),
                        "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("Kruskal-Wallis H") != std::string::npos);
  const auto report = nlohmann::json::parse(ReadFile(dir / "stats.json"));

  // Independent reading of the fixture: per-participant means by group.
  std::ifstream in(kSourceDir / "fixtures/likert.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string g, p, v;
    std::getline(fields, g, ',');
    std::getline(fields, p, ',');
    std::getline(fields, v, ',');
    if (!acc.count(g)) order.push_back(g);
    acc[g][p].first += std::stod(v);
    acc[g][p].second += 1;
  }
  stats::LikertGroups data;
  for (const auto& g : order) {
    stats::LikertGroup group{g, {}};
    for (const auto& [pid, sum] : acc[g]) group.scores.push_back(sum.first / sum.second);
    data.groups.push_back(group);
  }
  const auto kw = stats::KruskalWallis(data);
  CHECK(report.at("kruskal_wallis").at("h").get<double>() == doctest::Approx(kw.h).epsilon(1e-12));
  CHECK(report.at("kruskal_wallis").at("p").get<double>() ==
        doctest::Approx(kw.p_value).epsilon(1e-12));
  const auto dunn = stats::DunnBonferroni(data);
  const auto& adj = report.at("dunn_bonferroni").at("p_adjusted");
  for (size_t i = 0; i < dunn.k; ++i) {
    for (size_t j = 0; j < dunn.k; ++j) {
      CHECK(adj[i][j].get<double>() == doctest::Approx(dunn.Adjusted(i, j)).epsilon(1e-12));
    }
  }

  const CliRun csv = Cli({"stats", "--config", (kSourceDir / "fixtures/likert.json").string(),
                          "--out", dir.string(), "--format", "csv"});
  CHECK(csv.code == kExitOk);
  CHECK(fs::exists(dir / "stats.csv"));
}

TEST_CASE("cli pipeline: solve, gen-prefs, train, eval") {
  const fs::path dir = ScratchDir("pipeline");
  const nlohmann::json mdp = {{"builder", "gridworld"}, {"discount", 0.7}};
  WriteJson(dir / "solve.json", {{"mdp", mdp}, {"belief", {{"kind", "eps_greedy_class"}, {"eps", 0.1}}}});
  WriteJson(dir / "gen.json", {{"mdp", mdp}, {"belief", {{"kind", "eps_greedy_class"}, {"eps", 0.1}}},
                               {"n_pairs", 300}, {"seed", 4}});
  WriteJson(dir / "train.json", {{"mdp", mdp}, {"dataset", "run/dataset.jsonl"}});
  WriteJson(dir / "eval.json", {{"mdp", mdp}, {"policy", "run/policy.json"},
                                {"agent_eps", 0.1}, {"n_episodes", 50}});
  const fs::path run = dir / "run";
  for (const char* cmd : {"solve", "gen-prefs", "train", "eval"}) {
    const std::string name = std::string(cmd) == "gen-prefs" ? "gen" : cmd;
    const CliRun r = Cli({cmd, "--config", (dir / (name + ".json")).string(),
                          "--out", run.string()});
    CAPTURE(cmd);
    CAPTURE(r.err);
    REQUIRE(r.code == kExitOk);
  }
  for (const char* f : {"values.json", "dataset.jsonl", "policy.json", "loss_curve.csv", "eval.json"}) {
    CHECK(fs::exists(run / f));
  }
  const auto eval = nlohmann::json::parse(ReadFile(run / "eval.json"));
  CHECK(eval.at("n_samples") == 50);

  WriteJson(dir / "extra.json", {{"mdp", mdp}, {"policy", "run/policy.json"}, {"episodes", 3}});
  const CliRun extra = Cli({"eval", "--config", (dir / "extra.json").string(), "--out", run.string()});
  CHECK(extra.code == kExitValidation);
  CHECK(extra.err.find("episodes") != std::string::npos);
}

TEST_CASE("cli outputs are byte-identical across runs") {
  const fs::path dir = ScratchDir("determinism");
  const nlohmann::json mdp = {{"builder", "gridworld"}, {"discount", 0.7}};
  WriteJson(dir / "gen.json", {{"mdp", mdp}, {"n_pairs", 200}});
  WriteJson(dir / "bound.json", {{"n_instances", 10}, {"joint_instances", 10}});
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> runs = {
      {{"gen-prefs", "--config", (dir / "gen.json").string(), "--seed", "8"}, {"dataset.jsonl"}},
      {{"verify-bound", "--config", (dir / "bound.json").string(), "--seed", "3"},
       {"bound.csv", "bound_joint.csv", "summary.json"}},
      {{"case-study", "--p-lose", "0.3"}, {"case_study.json"}},
  };
  for (const auto& [args, files] : runs) {
    for (const char* tag : {"a", "b"}) {
      auto full = args;
      full.push_back("--out");
      full.push_back((dir / tag).string());
      REQUIRE(Cli(full).code == kExitOk);
    }
    for (const auto& f : files) {
      CAPTURE(f);
      CHECK(ReadFile(dir / "a" / f) == ReadFile(dir / "b" / f));
      CHECK(!ReadFile(dir / "a" / f).empty());
    }
  }
}

}  // namespace
}  // namespace beliefrl
