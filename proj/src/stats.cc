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

#include "beliefrl/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace beliefrl::stats {
namespace {

constexpr double kEpsilon = 1e-16;
constexpr int kMaxTerms = 10000;

struct Pooled {
  std::vector<double> ranks;     // midranks in pooled order
  std::vector<size_t> group_of;  // group index per pooled value
  double tie_sum = 0.0;          // sum over tie groups of t^3 - t
  double n = 0.0;
};

Pooled Pool(const LikertGroups& data) {
  data.Validate();
  Pooled pooled;
  std::vector<double> values;
  for (size_t g = 0; g < data.groups.size(); ++g) {
    for (double x : data.groups[g].scores) {
      values.push_back(x);
      pooled.group_of.push_back(g);
    }
  }
  pooled.ranks = MidRanks(values);
  pooled.n = static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  for (size_t i = 0; i < values.size();) {
    size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double t = static_cast<double>(j - i);
    pooled.tie_sum += t * t * t - t;
    i = j;
  }
  return pooled;
}

std::vector<double> MeanRanks(const LikertGroups& data, const Pooled& pooled) {
  std::vector<double> sums(data.groups.size(), 0.0);
  for (size_t i = 0; i < pooled.ranks.size(); ++i) {
    sums[pooled.group_of[i]] += pooled.ranks[i];
  }
  for (size_t g = 0; g < sums.size(); ++g) {
    sums[g] /= static_cast<double>(data.groups[g].scores.size());
  }
  return sums;
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(Trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(Trim(field));
  return fields;
}

[[noreturn]] void FailAt(size_t line, const std::string& what) {
  throw std::invalid_argument("likert csv line " + std::to_string(line) + ": " +
                              what);
}

}  // namespace

size_t LikertGroups::TotalCount() const {
  size_t n = 0;
  for (const auto& g : groups) n += g.scores.size();
  return n;
}

void LikertGroups::Validate() const {
  if (groups.size() < 2) throw std::invalid_argument("need at least 2 groups");
  for (const auto& g : groups) {
    if (g.scores.empty()) {
      throw std::invalid_argument("group '" + g.name + "' is empty");
    }
    for (double x : g.scores) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument("group '" + g.name + "' has a non-finite score");
      }
    }
  }
}

std::vector<double> MidRanks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 share the average of ranks i+1..j.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

double RegularizedGammaQ(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw std::invalid_argument("incomplete gamma: need a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x).
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxTerms; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEpsilon) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }
  // Continued fraction for Q(a, x), modified Lentz.
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(log_prefix) * h;
}

double ChiSquareSurvival(double x, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi-square: dof must be > 0");
  if (x <= 0.0) return 1.0;
  return RegularizedGammaQ(0.5 * dof, 0.5 * x);
}

double NormalTwoSided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

KruskalWallisResult KruskalWallis(const LikertGroups& data,
                                  bool tie_correction) {
  const Pooled pooled = Pool(data);
  const double n = pooled.n;
  if (n < 3.0) throw std::invalid_argument("kruskal-wallis needs N >= 3");
  KruskalWallisResult result;
  result.dof = data.groups.size() - 1;
  const std::vector<double> mean_ranks = MeanRanks(data, pooled);
  double sum = 0.0;
  for (size_t g = 0; g < data.groups.size(); ++g) {
    const double ng = static_cast<double>(data.groups[g].scores.size());
    const double rank_sum = mean_ranks[g] * ng;
    sum += rank_sum * rank_sum / ng;
  }
  double h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
  if (tie_correction) {
    const double correction = 1.0 - pooled.tie_sum / (n * n * n - n);
    if (correction <= 0.0) return {0.0, 1.0, result.dof};
    h /= correction;
  }
  result.h = std::max(0.0, h);
  result.p_value = ChiSquareSurvival(result.h, static_cast<double>(result.dof));
  return result;
}

DunnResult DunnBonferroni(const LikertGroups& data, bool tie_correction) {
  const Pooled pooled = Pool(data);
  const double n = pooled.n;
  const size_t k = data.groups.size();
  const std::vector<double> mean_ranks = MeanRanks(data, pooled);
  double base_variance = n * (n + 1.0) / 12.0;
  if (tie_correction) base_variance -= pooled.tie_sum / (12.0 * (n - 1.0));

  DunnResult result;
  result.k = k;
  result.comparisons = k * (k - 1) / 2;
  result.z.assign(k * k, 0.0);
  result.p_raw.assign(k * k, 1.0);
  result.p_adjusted.assign(k * k, 1.0);
  const double m = static_cast<double>(result.comparisons);
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double ni = static_cast<double>(data.groups[i].scores.size());
      const double nj = static_cast<double>(data.groups[j].scores.size());
      const double se = std::sqrt(base_variance * (1.0 / ni + 1.0 / nj));
      const double diff = mean_ranks[i] - mean_ranks[j];
      const double z = se > 0.0 ? diff / se : 0.0;
      result.z[i * k + j] = z;
      result.p_raw[i * k + j] = NormalTwoSided(z);
      result.p_adjusted[i * k + j] = std::min(1.0, m * result.p_raw[i * k + j]);
    }
  }
  return result;
}

double CliffsDelta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("cliff's delta: samples must be non-empty");
  }
  long long balance = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) ++balance;
      if (x < y) --balance;
    }
  }
  return static_cast<double>(balance) /
         (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

IngestReport IngestLikertCsv(std::istream& in, const RowFilter& keep) {
  struct Participant {
    std::string id;
    double sum = 0.0;
    size_t count = 0;
  };
  struct Group {
    std::string id;
    std::vector<Participant> participants;
  };
  std::vector<Group> groups;

  IngestReport report;
  std::string line;
  size_t line_no = 0;
  int col_group = -1, col_participant = -1, col_response = -1;
  size_t n_cols = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsvLine(line);
    if (!have_header) {
      n_cols = fields.size();
      for (size_t c = 0; c < fields.size(); ++c) {
        int* slot = fields[c] == "group_id"         ? &col_group
                    : fields[c] == "participant_id" ? &col_participant
                    : fields[c] == "response"       ? &col_response
                                                    : nullptr;
        if (slot == nullptr) FailAt(line_no, "unknown column '" + fields[c] + "'");
        if (*slot >= 0) FailAt(line_no, "duplicate column '" + fields[c] + "'");
        *slot = static_cast<int>(c);
      }
      if (col_group < 0 || col_participant < 0 || col_response < 0) {
        FailAt(line_no, "header must name group_id, participant_id, response");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != n_cols) {
      FailAt(line_no, "expected " + std::to_string(n_cols) + " fields, got " +
                          std::to_string(fields.size()));
    }
    LikertRow row;
    row.line = line_no;
    row.group_id = fields[static_cast<size_t>(col_group)];
    row.participant_id = fields[static_cast<size_t>(col_participant)];
    const std::string& text = fields[static_cast<size_t>(col_response)];
    if (row.group_id.empty() || row.participant_id.empty()) {
      FailAt(line_no, "empty group_id or participant_id");
    }
    size_t used = 0;
    try {
      row.response = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(row.response)) {
      FailAt(line_no, "non-numeric response '" + text + "'");
    }
    ++report.rows_read;
    if (keep && !keep(row)) {
      ++report.rows_excluded;
      report.exclusions.push_back("line " + std::to_string(line_no) +
                                  ": excluded by filter");
      continue;
    }
    auto group = std::find_if(groups.begin(), groups.end(),
                              [&](const Group& g) { return g.id == row.group_id; });
    if (group == groups.end()) {
      groups.push_back({row.group_id, {}});
      group = groups.end() - 1;
    }
    auto who = std::find_if(
        group->participants.begin(), group->participants.end(),
        [&](const Participant& p) { return p.id == row.participant_id; });
    if (who == group->participants.end()) {
      group->participants.push_back({row.participant_id});
      who = group->participants.end() - 1;
    }
    who->sum += row.response;
    ++who->count;
  }
  if (!have_header) throw std::invalid_argument("likert csv: empty file");
  if (report.rows_read == 0) FailAt(line_no, "no data rows");
  for (const Group& g : groups) {
    LikertGroup out{g.id, {}};
    for (const Participant& p : g.participants) {
      out.scores.push_back(p.sum / static_cast<double>(p.count));
    }
    report.data.groups.push_back(std::move(out));
  }
  return report;
}

IngestReport IngestLikertCsvFile(const std::string& path, const RowFilter& keep) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open likert csv '" + path + "'");
  return IngestLikertCsv(in, keep);
}

nlohmann::json StatsReportJson(const LikertGroups& data,
                               const KruskalWallisResult& kw,
                               const DunnResult& dunn) {
  nlohmann::json names = nlohmann::json::array();
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& g : data.groups) {
    names.push_back(g.name);
    sizes.push_back(g.scores.size());
  }
  auto matrix = [&](const std::vector<double>& flat) {
    nlohmann::json rows = nlohmann::json::array();
    for (size_t i = 0; i < dunn.k; ++i) {
      rows.push_back(std::vector<double>(
          flat.begin() + static_cast<std::ptrdiff_t>(i * dunn.k),
          flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * dunn.k)));
    }
    return rows;
  };
  std::vector<double> cliffs(dunn.k * dunn.k, 0.0);
  for (size_t i = 0; i < dunn.k; ++i) {
    for (size_t j = 0; j < dunn.k; ++j) {
      cliffs[i * dunn.k + j] =
          CliffsDelta(data.groups[i].scores, data.groups[j].scores);
    }
  }
  return {{"groups", names},
          {"group_sizes", sizes},
          {"cliffs_delta", matrix(cliffs)},
          {"kruskal_wallis", {{"h", kw.h}, {"p", kw.p_value}, {"dof", kw.dof}}},
          {"dunn_bonferroni",
           {{"comparisons", dunn.comparisons},
            {"z", matrix(dunn.z)},
            {"p_raw", matrix(dunn.p_raw)},
            {"p_adjusted", matrix(dunn.p_adjusted)}}}};
}

void WriteStatsTable(const LikertGroups& data, const KruskalWallisResult& kw,
                     const DunnResult& dunn, std::ostream& out) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "Kruskal-Wallis H = %.6f, dof = %zu, p = %.6g\n",
                kw.h, kw.dof, kw.p_value);
  out << buf << "Dunn-Bonferroni adjusted p-values:\n";
  std::snprintf(buf, sizeof(buf), "%-16s", "");
  out << buf;
  for (const auto& g : data.groups) {
    std::snprintf(buf, sizeof(buf), "%16s", g.name.c_str());
    out << buf;
  }
  out << '\n';
  for (size_t i = 0; i < dunn.k; ++i) {
    std::snprintf(buf, sizeof(buf), "%-16s", data.groups[i].name.c_str());
    out << buf;
    for (size_t j = 0; j < dunn.k; ++j) {
      std::snprintf(buf, sizeof(buf), "%16.3f", dunn.Adjusted(i, j));
      out << buf;
    }
    out << '\n';
  }
}

void WritePairwiseCsv(const LikertGroups& data, const DunnResult& dunn,
                      std::ostream& out) {
  out << "group_a,group_b,z,p_raw,p_adjusted,cliffs_delta\n";
  char buf[160];
  for (size_t i = 0; i < dunn.k; ++i) {
    for (size_t j = i + 1; j < dunn.k; ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", dunn.Z(i, j),
                    dunn.Raw(i, j), dunn.Adjusted(i, j),
                    CliffsDelta(data.groups[i].scores, data.groups[j].scores));
      out << data.groups[i].name << ',' << data.groups[j].name << ',' << buf;
    }
  }
}

}  // namespace beliefrl::stats
