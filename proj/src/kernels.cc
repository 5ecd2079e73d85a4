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

#include "beliefrl/kernels.h"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace beliefrl::kernels {
namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr size_t kBellmanParallelWork = 1 << 15;
constexpr size_t kPairsParallelMin = 256;

inline double BackupEntry(const TabularMdp& mdp,
                          std::span<const double> next_value, size_t s,
                          size_t a) {
  const auto p = mdp.TransitionRow(s, a);
  const auto r = mdp.RewardRow(s, a);
  const double discount = mdp.discount();
  double total = 0.0;
  for (size_t next = 0; next < p.size(); ++next) {
    if (p[next] == 0.0) continue;
    total += p[next] * (r[next] + discount * next_value[next]);
  }
  return total;
}

void LogSoftmaxRow(const double* logits, size_t n, double* out) {
  double m = logits[0];
  for (size_t a = 1; a < n; ++a) m = std::max(m, logits[a]);
  double sum = 0.0;
  for (size_t a = 0; a < n; ++a) sum += std::exp(logits[a] - m);
  const double lse = m + std::log(sum);
  for (size_t a = 0; a < n; ++a) out[a] = logits[a] - lse;
}

double SegmentScore(const Segment& seg, const std::vector<double>& log_probs,
                    size_t n_actions, const CplTerms& terms) {
  double total = 0.0;
  double weight = 1.0;
  for (const Transition& t : seg.transitions) {
    total += weight * log_probs[t.state * n_actions + t.action];
    weight *= terms.discount;
  }
  return terms.alpha * total;
}

// log(1 + e^x) without overflow.
inline double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// d score / d logits for one segment, scaled by `coeff`, added into grad.
void ScatterSegment(const Segment& seg, const std::vector<double>& log_probs,
                    size_t n_actions, const CplTerms& terms, double coeff,
                    std::vector<double>& grad) {
  double weight = terms.alpha * coeff;
  for (const Transition& t : seg.transitions) {
    const size_t row = t.state * n_actions;
    for (size_t b = 0; b < n_actions; ++b) {
      grad[row + b] -= weight * std::exp(log_probs[row + b]);
    }
    grad[row + t.action] += weight;
    weight *= terms.discount;
  }
}

void AddL2(std::span<const double> logits, const CplTerms& terms,
           CplEval& eval) {
  double norm = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    norm += logits[i] * logits[i];
    eval.gradient[i] += 2.0 * terms.l2_coeff * logits[i];
  }
  eval.loss += terms.l2_coeff * norm;
}

}  // namespace

int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void BellmanBackup(const TabularMdp& mdp, std::span<const double> next_value,
                   std::span<double> q) {
  const size_t na = mdp.n_actions();
  for (size_t s = 0; s < mdp.n_states(); ++s) {
    for (size_t a = 0; a < na; ++a) {
      q[s * na + a] = BackupEntry(mdp, next_value, s, a);
    }
  }
}

CplEval CplLossGrad(std::span<const double> logits, size_t n_states,
                    size_t n_actions, std::span<const PreferencePair> pairs,
                    const CplTerms& terms) {
  std::vector<double> log_probs(n_states * n_actions);
  for (size_t s = 0; s < n_states; ++s) {
    LogSoftmaxRow(logits.data() + s * n_actions, n_actions,
                  log_probs.data() + s * n_actions);
  }
  CplEval eval{0.0, std::vector<double>(logits.size(), 0.0)};
  const double inv_n = pairs.empty() ? 0.0 : 1.0 / static_cast<double>(pairs.size());
  for (const PreferencePair& pair : pairs) {
    const double pos = SegmentScore(pair.preferred(), log_probs, n_actions, terms);
    const double neg = SegmentScore(pair.rejected(), log_probs, n_actions, terms);
    const double x = terms.lambda_bias * neg - pos;
    eval.loss += Softplus(x);
    const double p = Sigmoid(x);
    ScatterSegment(pair.preferred(), log_probs, n_actions, terms, -p * inv_n,
                   eval.gradient);
    ScatterSegment(pair.rejected(), log_probs, n_actions, terms,
                   terms.lambda_bias * p * inv_n, eval.gradient);
  }
  eval.loss *= inv_n;
  AddL2(logits, terms, eval);
  return eval;
}

}  // namespace serial

namespace parallel {

void BellmanBackup(const TabularMdp& mdp, std::span<const double> next_value,
                   std::span<double> q) {
  const auto ns = static_cast<std::ptrdiff_t>(mdp.n_states());
  const size_t na = mdp.n_actions();
  const bool worth_it = mdp.n_states() * na * mdp.n_states() >= kBellmanParallelWork;
#pragma omp parallel for schedule(static) if (worth_it)
  for (std::ptrdiff_t s = 0; s < ns; ++s) {
    for (size_t a = 0; a < na; ++a) {
      q[static_cast<size_t>(s) * na + a] =
          BackupEntry(mdp, next_value, static_cast<size_t>(s), a);
    }
  }
}

CplEval CplLossGrad(std::span<const double> logits, size_t n_states,
                    size_t n_actions, std::span<const PreferencePair> pairs,
                    const CplTerms& terms) {
  std::vector<double> log_probs(n_states * n_actions);
  const auto ns = static_cast<std::ptrdiff_t>(n_states);
  const bool many_pairs = pairs.size() >= kPairsParallelMin;
#pragma omp parallel for schedule(static) if (many_pairs)
  for (std::ptrdiff_t s = 0; s < ns; ++s) {
    const size_t row = static_cast<size_t>(s) * n_actions;
    LogSoftmaxRow(logits.data() + row, n_actions, log_probs.data() + row);
  }

  // Per-pair logits of the contrastive term, computed independently.
  const auto np = static_cast<std::ptrdiff_t>(pairs.size());
  std::vector<double> margin(pairs.size());
#pragma omp parallel for schedule(static) if (many_pairs)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    const PreferencePair& pair = pairs[static_cast<size_t>(i)];
    const double pos = SegmentScore(pair.preferred(), log_probs, n_actions, terms);
    const double neg = SegmentScore(pair.rejected(), log_probs, n_actions, terms);
    margin[static_cast<size_t>(i)] = terms.lambda_bias * neg - pos;
  }

  // Ordered reduction keeps the result independent of the thread count.
  CplEval eval{0.0, std::vector<double>(logits.size(), 0.0)};
  const double inv_n = pairs.empty() ? 0.0 : 1.0 / static_cast<double>(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    eval.loss += Softplus(margin[i]);
    const double p = Sigmoid(margin[i]);
    ScatterSegment(pairs[i].preferred(), log_probs, n_actions, terms,
                   -p * inv_n, eval.gradient);
    ScatterSegment(pairs[i].rejected(), log_probs, n_actions, terms,
                   terms.lambda_bias * p * inv_n, eval.gradient);
  }
  eval.loss *= inv_n;
  AddL2(logits, terms, eval);
  return eval;
}

}  // namespace parallel
}  // namespace beliefrl::kernels
