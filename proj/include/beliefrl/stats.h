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

#ifndef BELIEFRL_STATS_H_
#define BELIEFRL_STATS_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace beliefrl::stats {

struct LikertGroup {
  std::string name;
  std::vector<double> scores;
};

// Named per-participant mean scores. At least two non-empty groups.
struct LikertGroups {
  std::vector<LikertGroup> groups;

  size_t TotalCount() const;
  void Validate() const;
};

struct KruskalWallisResult {
  double h = 0.0;
  double p_value = 1.0;
  size_t dof = 0;
};

KruskalWallisResult KruskalWallis(const LikertGroups& data,
                                  bool tie_correction = true);

struct DunnResult {
  size_t k = 0;
  // k x k, row-major. z is antisymmetric; p matrices have a unit diagonal.
  std::vector<double> z;
  std::vector<double> p_raw;
  std::vector<double> p_adjusted;
  size_t comparisons = 0;

  double Z(size_t i, size_t j) const { return z[i * k + j]; }
  double Raw(size_t i, size_t j) const { return p_raw[i * k + j]; }
  double Adjusted(size_t i, size_t j) const { return p_adjusted[i * k + j]; }
};

// Dunn's pairwise test with Bonferroni adjustment min(1, m * p).
DunnResult DunnBonferroni(const LikertGroups& data, bool tie_correction = true);

// (#{x > y} - #{x < y}) / (|a| |b|).
double CliffsDelta(std::span<const double> a, std::span<const double> b);

// Midranks (1-based) of the pooled sample.
std::vector<double> MidRanks(std::span<const double> values);

// Regularized upper incomplete gamma Q(a, x).
double RegularizedGammaQ(double a, double x);
double ChiSquareSurvival(double x, double dof);
// Two-sided standard normal tail P(|Z| >= |z|).
double NormalTwoSided(double z);

struct LikertRow {
  std::string group_id;
  std::string participant_id;
  double response = 0.0;
  size_t line = 0;
};

struct IngestReport {
  LikertGroups data;
  size_t rows_read = 0;
  size_t rows_excluded = 0;
  std::vector<std::string> exclusions;
};

using RowFilter = std::function<bool(const LikertRow&)>;

// CSV with header group_id,participant_id,response (any column order).
// Responses are averaged per participant, then grouped in order of first
// appearance. Rows rejected by `keep` are logged, not fatal.
IngestReport IngestLikertCsv(std::istream& in, const RowFilter& keep = nullptr);
IngestReport IngestLikertCsvFile(const std::string& path,
                                 const RowFilter& keep = nullptr);

nlohmann::json StatsReportJson(const LikertGroups& data,
                               const KruskalWallisResult& kw,
                               const DunnResult& dunn);
void WriteStatsTable(const LikertGroups& data, const KruskalWallisResult& kw,
                     const DunnResult& dunn, std::ostream& out);
// One row per unordered group pair (i < j).
void WritePairwiseCsv(const LikertGroups& data, const DunnResult& dunn,
                      std::ostream& out);

}  // namespace beliefrl::stats

#endif  // BELIEFRL_STATS_H_
