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

#include "beliefrl/preferences.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace beliefrl {
namespace {

void CheckEqualLength(const Segment& a, const Segment& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(
        "malformed pair: segments have lengths " + std::to_string(a.size()) +
        " and " + std::to_string(b.size()));
  }
  if (a.size() == 0) throw std::invalid_argument("malformed pair: empty segment");
}

}  // namespace

BeliefSpec BeliefSpec::EpsGreedyClass(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("belief.eps must lie in [0, 1]");
  }
  BeliefSpec b;
  b.kind = Kind::kEpsGreedyClass;
  b.eps = eps;
  return b;
}

BeliefSpec BeliefSpec::ExplicitTable(std::vector<double> q_table) {
  BeliefSpec b;
  b.kind = Kind::kExplicitTable;
  b.q_table = std::move(q_table);
  return b;
}

BeliefSpec BeliefSpec::PolicyDerived(Policy policy) {
  BeliefSpec b;
  b.kind = Kind::kPolicyDerived;
  b.policy = std::move(policy);
  return b;
}

ValueTables BeliefTables(const TabularMdp& mdp, const BeliefSpec& belief,
                         double tol) {
  switch (belief.kind) {
    case BeliefSpec::Kind::kOptimal:
      return ValueIteration(mdp, tol);
    case BeliefSpec::Kind::kEpsGreedyClass:
      return EpsGreedyValueIteration(mdp, belief.eps, tol);
    case BeliefSpec::Kind::kPolicyDerived:
      return PolicyEvaluation(mdp, *belief.policy, tol);
    case BeliefSpec::Kind::kExplicitTable: {
      const size_t ns = mdp.n_states();
      const size_t na = mdp.n_actions();
      if (belief.q_table.size() != ns * na) {
        throw std::invalid_argument("belief.q_table has wrong size");
      }
      std::vector<double> v(ns);
      for (size_t s = 0; s < ns; ++s) {
        v[s] = belief.q_table[s * na];
        for (size_t a = 1; a < na; ++a) {
          v[s] = std::max(v[s], belief.q_table[s * na + a]);
        }
      }
      return MakeTables(ns, na, belief.q_table, std::move(v));
    }
  }
  throw std::logic_error("unhandled belief kind");
}

double SegmentAdvScore(const Segment& segment, const ValueTables& tables,
                       double discount) {
  double total = 0.0;
  double weight = 1.0;
  for (const Transition& t : segment.transitions) {
    total += weight * tables.A(t.state, t.action);
    weight *= discount;
  }
  return total;
}

double SegmentReturn(const Segment& segment, const TabularMdp& mdp) {
  double total = 0.0;
  double weight = 1.0;
  for (const Transition& t : segment.transitions) {
    total += weight * mdp.R(t.state, t.action, t.next_state);
    weight *= mdp.discount();
  }
  return total;
}

double PreferenceProbability(double score_a, double score_b, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  const double gap = score_a - score_b;
  if (std::isinf(alpha)) {
    if (gap > 0.0) return 1.0;
    if (gap < 0.0) return 0.0;
    return 0.5;
  }
  const double x = alpha * gap;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double PrefProbBelief(const Segment& seg_a, const Segment& seg_b,
                      const ValueTables& belief, double discount,
                      double alpha) {
  CheckEqualLength(seg_a, seg_b);
  return PreferenceProbability(SegmentAdvScore(seg_a, belief, discount),
                               SegmentAdvScore(seg_b, belief, discount), alpha);
}

double PrefProbRegret(const Segment& seg_a, const Segment& seg_b,
                      const ValueTables& optimal, double discount,
                      double alpha) {
  return PrefProbBelief(seg_a, seg_b, optimal, discount, alpha);
}

double PrefProbPartialReturn(const Segment& seg_a, const Segment& seg_b,
                             const TabularMdp& mdp, double alpha) {
  CheckEqualLength(seg_a, seg_b);
  return PreferenceProbability(SegmentReturn(seg_a, mdp),
                               SegmentReturn(seg_b, mdp), alpha);
}

Side SampleLabel(double prob, bool noiseless, Rng& rng) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw std::invalid_argument("label probability must lie in [0, 1]");
  }
  if (noiseless) return prob >= 0.5 ? Side::kFirst : Side::kSecond;
  return rng.Bernoulli(prob) ? Side::kFirst : Side::kSecond;
}

PreferenceDataset GenerateDataset(const TabularMdp& mdp, const Policy& behavior,
                                  const BeliefSpec& belief,
                                  const DatasetOptions& options, uint64_t seed,
                                  std::string mdp_ref) {
  if (options.n_trajectories < 2) {
    throw std::invalid_argument("n_trajectories must be >= 2");
  }
  if (options.segment_len < 1) {
    throw std::invalid_argument("segment_len must be >= 1");
  }
  if (!(options.alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");

  PreferenceDataset dataset;
  dataset.belief = belief;
  dataset.options = options;
  dataset.seed = seed;
  dataset.mdp_ref = std::move(mdp_ref);
  if (options.n_pairs == 0) return dataset;

  Rng rng(seed);
  std::vector<Segment> trajectories;
  trajectories.reserve(options.n_trajectories);
  for (size_t i = 0; i < options.n_trajectories; ++i) {
    trajectories.push_back(Rollout(mdp, behavior, options.cap, rng));
  }

  struct Window {
    size_t trajectory;
    size_t offset;
  };
  std::vector<Window> windows;
  for (size_t i = 0; i < trajectories.size(); ++i) {
    const size_t len = trajectories[i].size();
    if (len < options.segment_len) continue;
    for (size_t off = 0; off + options.segment_len <= len; ++off) {
      windows.push_back({i, off});
    }
  }
  if (windows.size() < 2) {
    throw std::invalid_argument("no trajectory long enough for segment_len " +
                                std::to_string(options.segment_len));
  }
  auto cut = [&](const Window& w) {
    const auto& src = trajectories[w.trajectory].transitions;
    const auto first = src.begin() + static_cast<std::ptrdiff_t>(w.offset);
    return Segment{{first, first + static_cast<std::ptrdiff_t>(options.segment_len)}};
  };

  const ValueTables tables = BeliefTables(mdp, belief, options.tol);
  const bool noiseless = std::isinf(options.alpha);
  std::vector<size_t> order(windows.size());
  size_t cursor = order.size();
  while (dataset.pairs.size() < options.n_pairs) {
    if (cursor + 2 > order.size()) {
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.Shuffle(std::span<size_t>(order));
      cursor = 0;
    }
    PreferencePair pair;
    pair.first = cut(windows[order[cursor]]);
    pair.second = cut(windows[order[cursor + 1]]);
    cursor += 2;
    pair.label_prob = PrefProbBelief(pair.first, pair.second, tables,
                                     mdp.discount(), options.alpha);
    pair.label = SampleLabel(pair.label_prob, noiseless, rng);
    dataset.pairs.push_back(std::move(pair));
  }
  return dataset;
}

nlohmann::json AlphaToJson(double alpha) {
  if (std::isinf(alpha)) return "inf";
  return alpha;
}

double AlphaFromJson(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "noiseless") return kNoiseless;
    throw std::invalid_argument("alpha: expected a number or \"inf\"");
  }
  const double alpha = j.get<double>();
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  return alpha;
}

nlohmann::json BeliefSpecToJson(const BeliefSpec& belief) {
  switch (belief.kind) {
    case BeliefSpec::Kind::kOptimal:
      return {{"kind", "optimal"}};
    case BeliefSpec::Kind::kEpsGreedyClass:
      return {{"kind", "eps_greedy_class"}, {"eps", belief.eps}};
    case BeliefSpec::Kind::kExplicitTable:
      return {{"kind", "explicit_table"}, {"q", belief.q_table}};
    case BeliefSpec::Kind::kPolicyDerived:
      return {{"kind", "policy_derived"}, {"policy", PolicyToJson(*belief.policy)}};
  }
  throw std::logic_error("unhandled belief kind");
}

BeliefSpec BeliefSpecFromJson(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "optimal") return BeliefSpec::Optimal();
  if (kind == "eps_greedy_class") {
    return BeliefSpec::EpsGreedyClass(j.at("eps").get<double>());
  }
  if (kind == "explicit_table") {
    return BeliefSpec::ExplicitTable(j.at("q").get<std::vector<double>>());
  }
  if (kind == "policy_derived") {
    return BeliefSpec::PolicyDerived(PolicyFromJson(j.at("policy")));
  }
  throw std::invalid_argument("belief.kind: unknown kind '" + kind + "'");
}

void WriteDatasetJsonl(const PreferenceDataset& dataset, std::ostream& out) {
  const DatasetOptions& o = dataset.options;
  nlohmann::json header = {{"type", "header"},
                           {"belief_spec", BeliefSpecToJson(dataset.belief)},
                           {"alpha", AlphaToJson(o.alpha)},
                           {"seed", dataset.seed},
                           {"mdp_ref", dataset.mdp_ref},
                           {"segment_len", o.segment_len},
                           {"n_trajectories", o.n_trajectories},
                           {"n_pairs", o.n_pairs},
                           {"cap", o.cap}};
  out << header.dump() << '\n';
  for (const PreferencePair& pair : dataset.pairs) {
    nlohmann::json line = {
        {"first", SegmentToJson(pair.first)},
        {"second", SegmentToJson(pair.second)},
        {"label", pair.label == Side::kFirst ? "first" : "second"},
        {"label_prob", pair.label_prob}};
    out << line.dump() << '\n';
  }
}

PreferenceDataset ReadDatasetJsonl(std::istream& in) {
  PreferenceDataset dataset;
  std::string line;
  size_t line_no = 0;
  bool have_header = false;
  // Parse errors and missing or mistyped fields all surface as json
  // exceptions; report them as malformed input with the line number.
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line);
      if (!have_header) {
        if (j.value("type", "") != "header") {
          throw std::invalid_argument("dataset: first line must be the header");
        }
        dataset.belief = BeliefSpecFromJson(j.at("belief_spec"));
        dataset.options.alpha = AlphaFromJson(j.at("alpha"));
        dataset.seed = j.at("seed").get<uint64_t>();
        dataset.mdp_ref = j.at("mdp_ref").get<std::string>();
        dataset.options.segment_len = j.at("segment_len").get<size_t>();
        dataset.options.n_trajectories = j.value("n_trajectories", size_t{0});
        dataset.options.n_pairs = j.value("n_pairs", size_t{0});
        dataset.options.cap = j.value("cap", size_t{0});
        have_header = true;
        continue;
      }
      PreferencePair pair;
      pair.first = SegmentFromJson(j.at("first"));
      pair.second = SegmentFromJson(j.at("second"));
      CheckEqualLength(pair.first, pair.second);
      const auto label = j.at("label").get<std::string>();
      if (label != "first" && label != "second") {
        throw std::invalid_argument("dataset line " + std::to_string(line_no) +
                                    ": label must be \"first\" or \"second\"");
      }
      pair.label = label == "first" ? Side::kFirst : Side::kSecond;
      pair.label_prob = j.at("label_prob").get<double>();
      dataset.pairs.push_back(std::move(pair));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("dataset line " + std::to_string(line_no) +
                                ": " + e.what());
  }
  if (!have_header) throw std::invalid_argument("dataset: missing header");
  return dataset;
}

}  // namespace beliefrl
