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

#ifndef BELIEFRL_SOLVERS_H_
#define BELIEFRL_SOLVERS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "beliefrl/mdp.h"
#include "json.hpp"

namespace beliefrl {

inline constexpr double kDefaultTol = 1e-10;

// Q, V and advantage tables for one policy (or the optimum). Row-major
// (s, a) for q and adv.
struct ValueTables {
  size_t n_states = 0;
  size_t n_actions = 0;
  std::vector<double> q;
  std::vector<double> v;
  std::vector<double> adv;

  double Q(size_t s, size_t a) const { return q[s * n_actions + a]; }
  double A(size_t s, size_t a) const { return adv[s * n_actions + a]; }
  std::span<const double> QRow(size_t s) const {
    return {q.data() + s * n_actions, n_actions};
  }
};

// Builds tables from a q matrix and the state values it implies.
ValueTables MakeTables(size_t n_states, size_t n_actions, std::vector<double> q,
                       std::vector<double> v);

ValueTables ValueIteration(const TabularMdp& mdp, double tol = kDefaultTol);

// Best fixed point within the eps-greedy class: the backup uses
// (1 - eps) * max + eps * mean over next-state action values.
ValueTables EpsGreedyValueIteration(const TabularMdp& mdp, double eps,
                                    double tol = kDefaultTol);

// Direct linear solve when |S||A| <= 1e4, fixed-point iteration otherwise.
ValueTables PolicyEvaluation(const TabularMdp& mdp, const Policy& policy,
                             double tol = kDefaultTol);

// Argmax of q with lowest-index tie-break, softened by eps.
Policy GreedyPolicy(const ValueTables& tables, double eps = 0.0);
size_t ArgmaxLowest(std::span<const double> row);

double ExpectedReturn(const TabularMdp& mdp, const Policy& policy,
                      double tol = kDefaultTol);

// d(s) = (1 - discount) sum_t discount^t P(s_t = s), solved exactly.
std::vector<double> DiscountedStateDist(const TabularMdp& mdp,
                                        const Policy& policy);

// Right-hand side of the performance-difference lemma:
// 1/(1-discount) E_{s~d_new} E_{a~pi_new} [A^{pi_base}(s, a)].
double PerformanceDifference(const TabularMdp& mdp, const Policy& pi_new,
                             const Policy& pi_base);

nlohmann::json ValueTablesToJson(const ValueTables& tables);
ValueTables ValueTablesFromJson(const nlohmann::json& j);

}  // namespace beliefrl

#endif  // BELIEFRL_SOLVERS_H_
