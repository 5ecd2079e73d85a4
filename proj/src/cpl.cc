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

#include "beliefrl/cpl.h"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "beliefrl/kernels.h"

namespace beliefrl {
namespace {

kernels::CplTerms TermsOf(const CplConfig& cfg) {
  return {cfg.alpha, cfg.discount, cfg.lambda_bias, cfg.l2_coeff};
}

double Norm(std::span<const double> x) {
  double total = 0.0;
  for (double v : x) total += v * v;
  return std::sqrt(total);
}

}  // namespace

double SoftmaxPolicyParams::LogProb(size_t s, size_t a) const {
  const double* row = logits.data() + s * n_actions;
  double m = row[0];
  for (size_t b = 1; b < n_actions; ++b) m = std::max(m, row[b]);
  double sum = 0.0;
  for (size_t b = 0; b < n_actions; ++b) sum += std::exp(row[b] - m);
  return row[a] - m - std::log(sum);
}

Policy SoftmaxPolicyParams::ToPolicy() const {
  std::vector<double> probs(logits.size());
  for (size_t s = 0; s < n_states; ++s) {
    const double* row = logits.data() + s * n_actions;
    double m = row[0];
    for (size_t b = 1; b < n_actions; ++b) m = std::max(m, row[b]);
    double sum = 0.0;
    for (size_t b = 0; b < n_actions; ++b) {
      probs[s * n_actions + b] = std::exp(row[b] - m);
      sum += probs[s * n_actions + b];
    }
    for (size_t b = 0; b < n_actions; ++b) probs[s * n_actions + b] /= sum;
  }
  return Policy(n_states, n_actions, std::move(probs));
}

CplConfig CplConfig::Preset() { return CplConfig{}; }

CplConfig CplConfig::BiasPreset() {
  CplConfig cfg;
  cfg.lambda_bias = 0.01;
  cfg.l2_coeff = 0.0;
  return cfg;
}

CplConfig CplConfig::Named(const std::string& name) {
  if (name == "l2" || name == "default") return Preset();
  if (name == "bias") return BiasPreset();
  throw std::invalid_argument("cpl.preset: unknown preset '" + name + "'");
}

void CplConfig::Validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("cpl." + field + ": " + why);
  };
  if (!(alpha >= 0.0) || std::isinf(alpha)) fail("alpha", "must be finite and >= 0");
  if (!(discount >= 0.0 && discount <= 1.0)) fail("discount", "must lie in [0, 1]");
  if (!(learning_rate > 0.0)) fail("learning_rate", "must be > 0");
  if (!(lambda_bias > 0.0 && lambda_bias <= 1.0)) {
    fail("lambda_bias", "must lie in (0, 1]");
  }
  if (!(l2_coeff >= 0.0)) fail("l2_coeff", "must be >= 0");
  if (seeds == 0) fail("seeds", "must be positive");
}

nlohmann::json CplConfigToJson(const CplConfig& cfg) {
  return {{"alpha", cfg.alpha},
          {"discount", cfg.discount},
          {"learning_rate", cfg.learning_rate},
          {"epochs", cfg.epochs},
          {"lambda_bias", cfg.lambda_bias},
          {"l2_coeff", cfg.l2_coeff},
          {"seeds", cfg.seeds},
          {"minibatch_size", cfg.minibatch_size}};
}

CplConfig CplConfigFromJson(const nlohmann::json& j, const CplConfig& base) {
  if (!j.is_object()) throw std::invalid_argument("cpl: expected an object");
  CplConfig cfg = base;
  if (j.contains("preset")) cfg = CplConfig::Named(j.at("preset").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "preset") continue;
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "discount") cfg.discount = value.get<double>();
      else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
      else if (key == "epochs") cfg.epochs = value.get<size_t>();
      else if (key == "lambda_bias") cfg.lambda_bias = value.get<double>();
      else if (key == "l2_coeff") cfg.l2_coeff = value.get<double>();
      else if (key == "seeds") cfg.seeds = value.get<size_t>();
      else if (key == "minibatch_size") cfg.minibatch_size = value.get<size_t>();
      else throw std::invalid_argument("cpl." + key + ": unknown field");
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("cpl." + key + ": wrong type");
    }
  }
  cfg.Validate();
  return cfg;
}

double CplSegmentLogProb(const SoftmaxPolicyParams& params,
                         const Segment& segment, double discount,
                         double alpha) {
  double total = 0.0;
  double weight = 1.0;
  for (const Transition& t : segment.transitions) {
    total += weight * params.LogProb(t.state, t.action);
    weight *= discount;
  }
  return alpha * total;
}

double CplLoss(const SoftmaxPolicyParams& params,
               std::span<const PreferencePair> pairs, const CplConfig& cfg) {
  return kernels::parallel::CplLossGrad(params.logits, params.n_states,
                                        params.n_actions, pairs, TermsOf(cfg))
      .loss;
}

std::vector<double> CplGrad(const SoftmaxPolicyParams& params,
                            std::span<const PreferencePair> pairs,
                            const CplConfig& cfg) {
  return kernels::parallel::CplLossGrad(params.logits, params.n_states,
                                        params.n_actions, pairs, TermsOf(cfg))
      .gradient;
}

CplTrainingResult TrainCpl(std::span<const PreferencePair> pairs,
                           size_t n_states, size_t n_actions,
                           const CplConfig& cfg, Rng& rng) {
  cfg.Validate();
  SoftmaxPolicyParams params = SoftmaxPolicyParams::Zeros(n_states, n_actions);
  for (const PreferencePair& pair : pairs) {
    for (const Segment* seg : {&pair.first, &pair.second}) {
      for (const Transition& t : seg->transitions) {
        if (t.state >= n_states || t.action >= n_actions) {
          throw std::invalid_argument("cpl: dataset indexes outside the mdp");
        }
      }
    }
  }
  const kernels::CplTerms terms = TermsOf(cfg);
  std::vector<double> curve;
  curve.reserve(cfg.epochs + 1);

  auto step = [&](std::span<const PreferencePair> batch) {
    const auto eval = kernels::parallel::CplLossGrad(params.logits, n_states,
                                                     n_actions, batch, terms);
    for (size_t i = 0; i < params.logits.size(); ++i) {
      params.logits[i] -= cfg.learning_rate * eval.gradient[i];
    }
  };
  auto full_loss = [&](size_t epoch) {
    const double loss = kernels::parallel::CplLossGrad(params.logits, n_states,
                                                       n_actions, pairs, terms)
                            .loss;
    if (!std::isfinite(loss)) {
      throw std::runtime_error("cpl: non-finite loss at epoch " +
                               std::to_string(epoch) + " (parameter norm " +
                               std::to_string(Norm(params.logits)) + ")");
    }
    return loss;
  };

  std::vector<PreferencePair> shuffled;
  if (cfg.minibatch_size > 0) shuffled.assign(pairs.begin(), pairs.end());
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    curve.push_back(full_loss(epoch));
    if (cfg.minibatch_size == 0) {
      step(pairs);
      continue;
    }
    rng.Shuffle(std::span<PreferencePair>(shuffled));
    for (size_t begin = 0; begin < shuffled.size(); begin += cfg.minibatch_size) {
      const size_t len = std::min(cfg.minibatch_size, shuffled.size() - begin);
      step(std::span<const PreferencePair>(shuffled).subspan(begin, len));
    }
  }
  curve.push_back(full_loss(cfg.epochs));
  Policy policy = params.ToPolicy();
  return {std::move(params), std::move(policy), std::move(curve)};
}

nlohmann::json SoftmaxParamsToJson(const SoftmaxPolicyParams& params) {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t s = 0; s < params.n_states; ++s) {
    const auto first = params.logits.begin() + static_cast<std::ptrdiff_t>(s * params.n_actions);
    rows.push_back(std::vector<double>(
        first, first + static_cast<std::ptrdiff_t>(params.n_actions)));
  }
  return {{"n_states", params.n_states},
          {"n_actions", params.n_actions},
          {"logits", std::move(rows)},
          {"policy", PolicyToJson(params.ToPolicy())}};
}

void WriteLossCurveCsv(std::span<const double> curve, std::ostream& out) {
  out << "epoch,loss\n";
  char buf[64];
  for (size_t e = 0; e < curve.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", curve[e]);
    out << e << ',' << buf << '\n';
  }
}

}  // namespace beliefrl
