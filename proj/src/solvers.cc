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

#include "beliefrl/solvers.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "beliefrl/kernels.h"

namespace beliefrl {
namespace {

constexpr size_t kDirectSolveLimit = 10000;
constexpr size_t kMaxIterations = 10'000'000;
constexpr size_t kPolishSweeps = 8;

double SupDistance(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

// Iterates q <- T q where the next-state value is backup(q row).
template <typename Backup>
ValueTables IterateToFixedPoint(const TabularMdp& mdp, double tol,
                                Backup backup) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const size_t ns = mdp.n_states();
  const size_t na = mdp.n_actions();
  std::vector<double> q(ns * na, 0.0);
  std::vector<double> next_q(ns * na, 0.0);
  std::vector<double> v(ns, 0.0);
  for (size_t iter = 0; iter < kMaxIterations; ++iter) {
    for (size_t s = 0; s < ns; ++s) {
      v[s] = backup(std::span<const double>(q.data() + s * na, na));
    }
    kernels::parallel::BellmanBackup(mdp, v, next_q);
    const double residual = SupDistance(q, next_q);
    std::swap(q, next_q);
    if (residual < tol) break;
  }
  for (size_t s = 0; s < ns; ++s) {
    v[s] = backup(std::span<const double>(q.data() + s * na, na));
  }
  return MakeTables(ns, na, std::move(q), std::move(v));
}

double RowMax(std::span<const double> row) {
  return *std::max_element(row.begin(), row.end());
}

double RowMean(std::span<const double> row) {
  double total = 0.0;
  for (double x : row) total += x;
  return total / static_cast<double>(row.size());
}

void CheckShapes(const TabularMdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() ||
      policy.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument("policy does not match mdp dimensions");
  }
}

// (I - discount * P_pi) as a dense matrix.
Eigen::MatrixXd FlowMatrix(const TabularMdp& mdp, const Policy& policy) {
  const size_t ns = mdp.n_states();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(ns, ns);
  for (size_t s = 0; s < ns; ++s) {
    for (size_t a = 0; a < mdp.n_actions(); ++a) {
      const double pa = policy(s, a);
      if (pa == 0.0) continue;
      const auto row = mdp.TransitionRow(s, a);
      for (size_t next = 0; next < ns; ++next) {
        m(s, next) -= mdp.discount() * pa * row[next];
      }
    }
  }
  return m;
}

}  // namespace

ValueTables MakeTables(size_t n_states, size_t n_actions, std::vector<double> q,
                       std::vector<double> v) {
  ValueTables t;
  t.n_states = n_states;
  t.n_actions = n_actions;
  t.adv.resize(q.size());
  for (size_t s = 0; s < n_states; ++s) {
    for (size_t a = 0; a < n_actions; ++a) {
      t.adv[s * n_actions + a] = q[s * n_actions + a] - v[s];
    }
  }
  t.q = std::move(q);
  t.v = std::move(v);
  return t;
}

ValueTables ValueIteration(const TabularMdp& mdp, double tol) {
  return IterateToFixedPoint(mdp, tol, RowMax);
}

ValueTables EpsGreedyValueIteration(const TabularMdp& mdp, double eps,
                                    double tol) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("eps must lie in [0, 1]");
  }
  return IterateToFixedPoint(mdp, tol, [eps](std::span<const double> row) {
    return (1.0 - eps) * RowMax(row) + eps * RowMean(row);
  });
}

ValueTables PolicyEvaluation(const TabularMdp& mdp, const Policy& policy,
                             double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  CheckShapes(mdp, policy);
  const size_t ns = mdp.n_states();
  const size_t na = mdp.n_actions();
  std::vector<double> v(ns, 0.0);
  if (ns * na <= kDirectSolveLimit) {
    Eigen::VectorXd rhs(ns);
    for (size_t s = 0; s < ns; ++s) {
      double r = 0.0;
      for (size_t a = 0; a < na; ++a) r += policy(s, a) * mdp.ExpectedReward(s, a);
      rhs(s) = r;
    }
    const Eigen::VectorXd sol = FlowMatrix(mdp, policy).partialPivLu().solve(rhs);
    for (size_t s = 0; s < ns; ++s) v[s] = mdp.IsTerminal(s) ? 0.0 : sol(s);
  } else {
    std::vector<double> q(ns * na, 0.0);
    for (size_t iter = 0; iter < kMaxIterations; ++iter) {
      kernels::parallel::BellmanBackup(mdp, v, q);
      double residual = 0.0;
      for (size_t s = 0; s < ns; ++s) {
        double value = 0.0;
        for (size_t a = 0; a < na; ++a) value += policy(s, a) * q[s * na + a];
        residual = std::max(residual, std::abs(value - v[s]));
        v[s] = value;
      }
      if (residual < tol) break;
    }
  }
  std::vector<double> q(ns * na, 0.0);
  // A few exact sweeps polish the solve; on acyclic MDPs they reach the
  // exact fixed point.
  for (size_t sweep = 0; sweep < kPolishSweeps; ++sweep) {
    kernels::parallel::BellmanBackup(mdp, v, q);
    bool unchanged = true;
    for (size_t s = 0; s < ns; ++s) {
      double value = 0.0;
      if (!mdp.IsTerminal(s)) {
        for (size_t a = 0; a < na; ++a) value += policy(s, a) * q[s * na + a];
      }
      unchanged = unchanged && value == v[s];
      v[s] = value;
    }
    if (unchanged) break;
  }
  kernels::parallel::BellmanBackup(mdp, v, q);
  // Recompute v from q so that sum_a pi(a|s) adv(s, a) vanishes to rounding.
  for (size_t s = 0; s < ns; ++s) {
    if (mdp.IsTerminal(s)) {
      std::fill_n(q.begin() + static_cast<std::ptrdiff_t>(s * na), na, 0.0);
      v[s] = 0.0;
      continue;
    }
    double value = 0.0;
    for (size_t a = 0; a < na; ++a) value += policy(s, a) * q[s * na + a];
    v[s] = value;
  }
  return MakeTables(ns, na, std::move(q), std::move(v));
}

size_t ArgmaxLowest(std::span<const double> row) {
  size_t best = 0;
  for (size_t a = 1; a < row.size(); ++a) {
    if (row[a] > row[best]) best = a;
  }
  return best;
}

Policy GreedyPolicy(const ValueTables& tables, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("eps must lie in [0, 1]");
  }
  const size_t na = tables.n_actions;
  const double spread = eps / static_cast<double>(na);
  std::vector<double> probs(tables.n_states * na, spread);
  for (size_t s = 0; s < tables.n_states; ++s) {
    probs[s * na + ArgmaxLowest(tables.QRow(s))] += 1.0 - eps;
  }
  return Policy(tables.n_states, na, std::move(probs));
}

double ExpectedReturn(const TabularMdp& mdp, const Policy& policy, double tol) {
  const ValueTables tables = PolicyEvaluation(mdp, policy, tol);
  double total = 0.0;
  for (size_t s = 0; s < mdp.n_states(); ++s) {
    total += mdp.start_dist()[s] * tables.v[s];
  }
  return total;
}

std::vector<double> DiscountedStateDist(const TabularMdp& mdp,
                                        const Policy& policy) {
  CheckShapes(mdp, policy);
  const size_t ns = mdp.n_states();
  // Occupancy x solves x^T (I - discount P_pi) = mu^T.
  Eigen::VectorXd mu(ns);
  for (size_t s = 0; s < ns; ++s) mu(s) = mdp.start_dist()[s];
  const Eigen::VectorXd x =
      FlowMatrix(mdp, policy).transpose().partialPivLu().solve(mu);
  std::vector<double> d(ns);
  for (size_t s = 0; s < ns; ++s) {
    d[s] = std::max(0.0, (1.0 - mdp.discount()) * x(s));
  }
  return d;
}

double PerformanceDifference(const TabularMdp& mdp, const Policy& pi_new,
                             const Policy& pi_base) {
  CheckShapes(mdp, pi_new);
  CheckShapes(mdp, pi_base);
  const std::vector<double> d = DiscountedStateDist(mdp, pi_new);
  const ValueTables base = PolicyEvaluation(mdp, pi_base);
  double total = 0.0;
  for (size_t s = 0; s < mdp.n_states(); ++s) {
    double expected_adv = 0.0;
    for (size_t a = 0; a < mdp.n_actions(); ++a) {
      expected_adv += pi_new(s, a) * base.A(s, a);
    }
    total += d[s] * expected_adv;
  }
  return total / (1.0 - mdp.discount());
}

nlohmann::json ValueTablesToJson(const ValueTables& tables) {
  auto matrix = [&](const std::vector<double>& flat) {
    nlohmann::json rows = nlohmann::json::array();
    for (size_t s = 0; s < tables.n_states; ++s) {
      const auto first = flat.begin() + static_cast<std::ptrdiff_t>(s * tables.n_actions);
      rows.push_back(std::vector<double>(
          first, first + static_cast<std::ptrdiff_t>(tables.n_actions)));
    }
    return rows;
  };
  return {{"q", matrix(tables.q)}, {"v", tables.v}, {"adv", matrix(tables.adv)}};
}

ValueTables ValueTablesFromJson(const nlohmann::json& j) {
  auto flatten = [](const nlohmann::json& rows, size_t& n_rows,
                    size_t& n_cols) {
    std::vector<double> flat;
    n_rows = rows.size();
    n_cols = n_rows == 0 ? 0 : rows.at(0).size();
    for (const auto& row : rows) {
      if (row.size() != n_cols) {
        throw std::invalid_argument("value tables: ragged matrix");
      }
      for (const auto& x : row) flat.push_back(x.get<double>());
    }
    return flat;
  };
  ValueTables t;
  size_t rows = 0, cols = 0, adv_rows = 0, adv_cols = 0;
  t.q = flatten(j.at("q"), rows, cols);
  t.adv = flatten(j.at("adv"), adv_rows, adv_cols);
  t.v = j.at("v").get<std::vector<double>>();
  if (rows != adv_rows || cols != adv_cols || t.v.size() != rows) {
    throw std::invalid_argument("value tables: inconsistent shapes");
  }
  t.n_states = rows;
  t.n_actions = cols;
  return t;
}

}  // namespace beliefrl
