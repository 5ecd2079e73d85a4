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

#ifndef BELIEFRL_KERNELS_H_
#define BELIEFRL_KERNELS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "beliefrl/mdp.h"
#include "beliefrl/preferences.h"

// Data-parallel inner loops. Each kernel has a plain serial reference
// implementation and an OpenMP version; both produce bit-identical output
// (no parallel floating-point reductions, fixed accumulation order).
namespace beliefrl::kernels {


// Output of one CPL loss/gradient evaluation.
struct CplEval {
  double loss = 0.0;             // mean contrastive loss + l2 term
  std::vector<double> gradient;  // d loss / d logits, row-major (s, a)
};

struct CplTerms {
  double alpha = 1.0;
  double discount = 1.0;
  double lambda_bias = 1.0;
  double l2_coeff = 0.0;
};

namespace serial {
void BellmanBackup(const TabularMdp& mdp, std::span<const double> next_value,
                   std::span<double> q);
CplEval CplLossGrad(std::span<const double> logits, size_t n_states,
                    size_t n_actions, std::span<const PreferencePair> pairs,
                    const CplTerms& terms);
}  // namespace serial

namespace parallel {
void BellmanBackup(const TabularMdp& mdp, std::span<const double> next_value,
                   std::span<double> q);
CplEval CplLossGrad(std::span<const double> logits, size_t n_states,
                    size_t n_actions, std::span<const PreferencePair> pairs,
                    const CplTerms& terms);
}  // namespace parallel

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int MaxThreads();

}  // namespace beliefrl::kernels

#endif  // BELIEFRL_KERNELS_H_
