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
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "beliefrl/stats.h"
#include "doctest.h"

namespace beliefrl::stats {
namespace {

LikertGroups Groups(std::vector<std::vector<double>> samples) {
  LikertGroups g;
  for (size_t i = 0; i < samples.size(); ++i) {
    g.groups.push_back({"g" + std::to_string(i), std::move(samples[i])});
  }
  return g;
}

TEST_CASE("Kruskal-Wallis on separated groups") {
  const auto kw = KruskalWallis(Groups({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}));
  CHECK(std::abs(kw.h - 7.2) < 1e-9);
  CHECK(kw.dof == 2);
  CHECK(std::abs(kw.p_value - 0.02732) < 1e-4);
  CHECK(std::abs(kw.p_value - std::exp(-3.6)) < 1e-12);
}

TEST_CASE("Kruskal-Wallis degenerate and symmetric cases") {
  const auto flat = KruskalWallis(Groups({{3, 3}, {3, 3, 3}, {3}}));
  CHECK(flat.h == 0.0);
  CHECK(flat.p_value == 1.0);

  const auto a = KruskalWallis(Groups({{1, 4, 4, 6}, {2, 2, 9}, {5, 7, 7, 7}}));
  const auto b = KruskalWallis(Groups({{5, 7, 7, 7}, {1, 4, 4, 6}, {2, 2, 9}}));
  CHECK(a.h == doctest::Approx(b.h).epsilon(1e-14));

  CHECK_THROWS_AS(KruskalWallis(Groups({{1, 2, 3}})), std::invalid_argument);
  CHECK_THROWS_AS(KruskalWallis(Groups({{1, 2}, {}})), std::invalid_argument);
}

TEST_CASE("tie correction") {
  // Ties: three 2s and two 4s among N = 8, so the correction divides by
  // 1 - sum(t^3 - t) / (N^3 - N) = 1 - 30/504.
  const auto data = Groups({{1, 2, 2}, {2, 3, 4}, {4, 5}});
  const auto raw = KruskalWallis(data, false);
  const auto corrected = KruskalWallis(data, true);
  const double factor = 1.0 - (24.0 + 6.0) / (512.0 - 8.0);
  CHECK(corrected.h == doctest::Approx(raw.h / factor).epsilon(1e-12));
}

TEST_CASE("midranks") {
  const std::vector<double> x{10, 20, 20, 30};
  CHECK(MidRanks(x) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
}

TEST_CASE("incomplete gamma against an independent implementation") {
  for (double a : {0.5, 1.0, 2.5, 7.0, 30.0}) {
    for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 50.0}) {
      const double expected = boost::math::gamma_q(a, x);
      CHECK(RegularizedGammaQ(a, x) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
  CHECK(ChiSquareSurvival(0.0, 3) == 1.0);
  CHECK(ChiSquareSurvival(7.2, 2) == doctest::Approx(std::exp(-3.6)).epsilon(1e-12));
}

TEST_CASE("normal tail against an independent implementation") {
  const boost::math::normal_distribution<double> normal;
  for (double z : {0.0, 0.5, 1.96, 2.683, -3.0, 6.0}) {
    const double expected = 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(z)));
    CHECK(NormalTwoSided(z) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("Dunn with Bonferroni adjustment") {
  const auto data = Groups({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const auto d = DunnBonferroni(data);
  REQUIRE(d.k == 3);
  CHECK(d.comparisons == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(d.Raw(i, i) == 1.0);
    CHECK(d.Adjusted(i, i) == 1.0);
    for (size_t j = 0; j < 3; ++j) {
      CHECK(d.Adjusted(i, j) == std::min(1.0, 3.0 * d.Raw(i, j)));
      CHECK(d.Z(i, j) == -d.Z(j, i));
    }
  }
  // Outer pair by hand: mean ranks 2 and 8, se = sqrt(9 * 10 / 12 * 2 / 3).
  const double z = (2.0 - 8.0) / std::sqrt(7.5 * (2.0 / 3.0));
  const boost::math::normal_distribution<double> normal;
  const double p = 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(z)));
  CHECK(d.Z(0, 2) == doctest::Approx(z).epsilon(1e-12));
  CHECK(d.Adjusted(0, 2) == doctest::Approx(std::min(1.0, 3.0 * p)).epsilon(1e-10));

  const auto same = DunnBonferroni(Groups({{1, 5, 9}, {9, 5, 1}, {5, 9, 1}}));
  for (double p_adj : same.p_adjusted) CHECK(p_adj == 1.0);
}

TEST_CASE("Cliff's delta") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(CliffsDelta(a, b) == -1.0);
  CHECK(CliffsDelta(b, a) == 1.0);
  const std::vector<double> two{2};
  CHECK(CliffsDelta(two, two) == 0.0);
  const std::vector<double> c{1, 2}, e{2, 3};
  CHECK(CliffsDelta(c, e) == -0.75);
  CHECK_THROWS_AS(CliffsDelta(c, std::vector<double>{}), std::invalid_argument);

  const std::vector<double> x{1, 4, 4, 7, 9}, y{2, 4, 5, 5};
  CHECK(CliffsDelta(x, y) == -CliffsDelta(y, x));
  const auto d = DunnBonferroni(Groups({x, y}));
  CHECK((d.Z(0, 1) > 0) == (CliffsDelta(x, y) > 0));
}

TEST_CASE("csv ingestion") {
  std::istringstream in(
      "group_id,participant_id,response\n"
      "control,p1,1\ncontrol,p1,3\ncontrol,p2,4\ncontrol,p2,4\n"
      "safe,p3,5\nsafe,p3,6\nsafe,p4,2\nsafe,p4,2\n"
      "unsafe,p5,7\nunsafe,p5,7\nunsafe,p6,1\nunsafe,p6,2\n");
  const IngestReport r = IngestLikertCsv(in);
  CHECK(r.rows_read == 12);
  REQUIRE(r.data.groups.size() == 3);
  CHECK(r.data.groups[0].name == "control");
  CHECK(r.data.groups[0].scores == std::vector<double>{2.0, 4.0});
  CHECK(r.data.groups[1].scores == std::vector<double>{5.5, 2.0});
  CHECK(r.data.groups[2].scores == std::vector<double>{7.0, 1.5});

  std::istringstream reordered("response,group_id,participant_id\n3,a,x\n4,b,y\n");
  CHECK(IngestLikertCsv(reordered).data.groups.size() == 2);
}

TEST_CASE("csv ingestion errors name the line") {
  std::istringstream bad(
      "group_id,participant_id,response\n"
      "a,p1,1\na,p2,2\nb,p3,3\nb,p4,4\nc,p5,5\nc,p6,oops\n");
  try {
    IngestLikertCsv(bad);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }
  std::istringstream empty("");
  CHECK_THROWS_AS(IngestLikertCsv(empty), std::invalid_argument);
  std::istringstream unknown("group_id,participant_id,response,extra\n");
  CHECK_THROWS_AS(IngestLikertCsv(unknown), std::invalid_argument);
  std::istringstream short_row("group_id,participant_id,response\na,p1\n");
  CHECK_THROWS_AS(IngestLikertCsv(short_row), std::invalid_argument);
}

TEST_CASE("row filters log exclusions") {
  std::istringstream in(
      "group_id,participant_id,response\n"
      "a,p1,1\na,p2,2\nb,p3,3\nb,bot,9\n");
  const IngestReport r = IngestLikertCsv(
      in, [](const LikertRow& row) { return row.participant_id != "bot"; });
  CHECK(r.rows_excluded == 1);
  REQUIRE(r.exclusions.size() == 1);
  CHECK(r.exclusions[0].find("line 5") != std::string::npos);
  CHECK(r.data.groups[1].scores == std::vector<double>{3.0});
}

TEST_CASE("report writers") {
  const auto data = Groups({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const auto kw = KruskalWallis(data);
  const auto d = DunnBonferroni(data);
  const auto j = StatsReportJson(data, kw, d);
  CHECK(j.at("kruskal_wallis").at("h").get<double>() == kw.h);
  CHECK(j.at("cliffs_delta")[0][2].get<double>() == -1.0);
  std::ostringstream csv;
  WritePairwiseCsv(data, d, csv);
  std::string header;
  std::istringstream lines(csv.str());
  std::getline(lines, header);
  CHECK(header == "group_a,group_b,z,p_raw,p_adjusted,cliffs_delta");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 3);
}

}  // namespace
}  // namespace beliefrl::stats
