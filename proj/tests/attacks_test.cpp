// Copyright 2026 The fmdsim Authors
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
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "fmd/attacks.hpp"
#include "fmd/graph.hpp"
#include "fmd/rng.hpp"
#include "fmd/simulate.hpp"
#include "test_support.hpp"

namespace {

// Statistical oracle values in this file were generated via scipy and frozen.

const fmd::SignificanceLevel kAlpha01{0.01};

TEST_CASE("test quantiles match the oracle values") {
  CHECK(fmd::test_quantile_normal(kAlpha01, fmd::Tails::two) ==
        doctest::Approx(2.5758293035489004).epsilon(1e-9));
  CHECK(fmd::test_quantile_normal(kAlpha01, fmd::Tails::one) ==
        doctest::Approx(2.3263478740408408).epsilon(1e-9));
  CHECK(fmd::test_quantile_t(kAlpha01, 29, fmd::Tails::two) ==
        doctest::Approx(2.756385903670335).epsilon(1e-9));
  CHECK(fmd::test_quantile_t(kAlpha01, 99, fmd::Tails::two) ==
        doctest::Approx(2.6264054572808275).epsilon(1e-9));
  CHECK_THROWS_AS(fmd::test_quantile_normal({0.0}, fmd::Tails::two), std::invalid_argument);
  CHECK_THROWS_AS(fmd::test_quantile_t(kAlpha01, 0, fmd::Tails::two), std::invalid_argument);
}

TEST_CASE("approx_guard requires five expected counts on both sides") {
  CHECK(fmd::approx_guard(100, fmd::DetectionRate::from_value(0.05)));
  CHECK_FALSE(fmd::approx_guard(99, fmd::DetectionRate::from_value(0.05)));
  CHECK_FALSE(fmd::approx_guard(100, fmd::DetectionRate::from_value(0.04)));
  CHECK_FALSE(fmd::approx_guard(6, fmd::DetectionRate::from_value(0.9)));
  CHECK(fmd::approx_guard(200, fmd::DetectionRate::from_value(0.5)));
}

TEST_CASE("relationship test uses the normal quantile at out >= 100") {
  fmd::PairTestResult hit = fmd::rel_anon_test(11.0, 100,
                                               fmd::DetectionRate::from_value(0.05), kAlpha01);
  CHECK(hit.mean == doctest::Approx(5.0));
  CHECK(hit.statistic == doctest::Approx(2.7529888064467407).epsilon(1e-12));
  CHECK(hit.quantile == doctest::Approx(2.5758293035489004).epsilon(1e-9));
  CHECK(hit.verdict == fmd::Verdict::flagged);
  CHECK(hit.guard_ok);
  CHECK(hit.raw_exceeds);

  fmd::PairTestResult miss = fmd::rel_anon_test(10.0, 100,
                                                fmd::DetectionRate::from_value(0.05), kAlpha01);
  CHECK(miss.statistic == doctest::Approx(2.2941573387056176).epsilon(1e-12));
  CHECK(miss.verdict == fmd::Verdict::not_flagged);
}

TEST_CASE("relationship test uses the t quantile below the cutoff") {
  fmd::PairTestResult hit = fmd::rel_anon_test(21.0, 60, fmd::DetectionRate::from_value(0.2),
                                               kAlpha01);
  CHECK(hit.statistic == doctest::Approx(2.9047375096555625).epsilon(1e-12));
  CHECK(hit.quantile == doctest::Approx(2.661758752162967).epsilon(1e-9));
  CHECK(hit.verdict == fmd::Verdict::flagged);

  fmd::PairTestResult miss = fmd::rel_anon_test(20.0, 60, fmd::DetectionRate::from_value(0.2),
                                                kAlpha01);
  CHECK(miss.statistic == doctest::Approx(2.581988897471611).epsilon(1e-12));
  // Would be flagged under the normal quantile (2.576); the t quantile says no.
  CHECK(miss.verdict == fmd::Verdict::not_flagged);
}

TEST_CASE("degenerate rates use exact rules") {
  fmd::DetectionRate zero = fmd::DetectionRate::from_value(0.0);
  fmd::PairTestResult r = fmd::rel_anon_test(1.0, 50, zero, kAlpha01);
  CHECK(r.verdict == fmd::Verdict::flagged);
  CHECK(std::isinf(r.statistic));
  CHECK(r.quantile == 0.0);
  CHECK(fmd::rel_anon_test(0.0, 50, zero, kAlpha01).verdict == fmd::Verdict::not_flagged);

  fmd::DetectionRate one = fmd::DetectionRate::from_value(1.0);
  fmd::PairTestResult full = fmd::rel_anon_test(50.0, 50, one, kAlpha01);
  CHECK(full.verdict == fmd::Verdict::not_flagged);
  CHECK(full.statistic == 0.0);
  CHECK_FALSE(full.raw_exceeds);
}

TEST_CASE("guard failure yields inapplicable but raw_exceeds still reports") {
  // out=100, p=0.01: expected fuzz 1 < 5, approximation unusable.
  fmd::PairTestResult r = fmd::rel_anon_test(6.0, 100, fmd::DetectionRate::from_value(0.01),
                                             kAlpha01);
  CHECK_FALSE(r.guard_ok);
  CHECK(r.verdict == fmd::Verdict::inapplicable);
  CHECK(r.raw_exceeds);  // |stat| ~ 5.0 > 2.58

  // out=1: no degrees of freedom, quantile NaN, never raw-exceeds.
  fmd::PairTestResult tiny = fmd::rel_anon_test(1.0, 1, fmd::DetectionRate::from_value(0.5),
                                                kAlpha01);
  CHECK(tiny.verdict == fmd::Verdict::inapplicable);
  CHECK(std::isnan(tiny.quantile));
  CHECK_FALSE(tiny.raw_exceeds);

  CHECK_THROWS_AS(fmd::rel_anon_test(1.0, 0, fmd::DetectionRate::from_value(0.5), kAlpha01),
                  std::invalid_argument);
}

TEST_CASE("min_exposing_messages matches the frozen examples") {
  CHECK(fmd::min_exposing_messages(100, fmd::DetectionRate::from_value(0.05), kAlpha01) == 6);
  CHECK(fmd::min_exposing_messages(30, fmd::DetectionRate::from_value(0.1), kAlpha01) == 6);
  CHECK(fmd::min_exposing_messages(100, fmd::DetectionRate::from_value(0.0), kAlpha01) == 1);
  CHECK_FALSE(fmd::min_exposing_messages(100, fmd::DetectionRate::from_value(1.0), kAlpha01)
                  .has_value());
  CHECK_FALSE(fmd::min_exposing_messages(1, fmd::DetectionRate::from_value(0.5), kAlpha01)
                  .has_value());
}

TEST_CASE("min_exposing_messages agrees with a brute-force scan of the test") {
  for (std::int64_t out : {30, 100, 300, 1000}) {
    for (unsigned l = 1; l <= 7; ++l) {
      fmd::DetectionRate p = fmd::dyadic_rate(l);
      std::optional<std::int64_t> direct = fmd::min_exposing_messages(out, p, kAlpha01);
      // Oracle: test the expected observation at each genuine count with the
      // raw threshold rule.
      std::optional<std::int64_t> scan;
      for (std::int64_t in = 1; in <= out; ++in) {
        double expected = fmd::expected_tags(in, out, p);
        if (fmd::rel_anon_test(expected, out, p, kAlpha01).raw_exceeds) {
          scan = in;
          break;
        }
      }
      CHECK_MESSAGE(direct == scan, "out=", out, " l=", l);
    }
  }
}

TEST_CASE("tda_test matches the frozen examples") {
  fmd::PairTestResult hit = fmd::tda_test(416.0, 25000, fmd::dyadic_rate(7), kAlpha01);
  CHECK(hit.mean == doctest::Approx(195.3125));
  CHECK(hit.std == doctest::Approx(13.920726313441767).epsilon(1e-12));
  CHECK(hit.statistic == doctest::Approx(15.85315988770683).epsilon(1e-12));
  CHECK(hit.verdict == fmd::Verdict::flagged);

  fmd::PairTestResult miss = fmd::tda_test(210.0, 25000, fmd::dyadic_rate(7), kAlpha01);
  CHECK(miss.statistic == doctest::Approx(1.0550814425406698).epsilon(1e-12));
  CHECK(miss.verdict == fmd::Verdict::not_flagged);
}

TEST_CASE("min_rate_for_tda matches the frozen examples and the grid scan") {
  CHECK(fmd::min_rate_for_tda(25000, 50, kAlpha01) ==
        doctest::Approx(0.014848037902294888).epsilon(1e-12));
  CHECK(fmd::min_rate_for_tda(25000, 100, kAlpha01) ==
        doctest::Approx(0.05685940002898328).epsilon(1e-12));
  CHECK(fmd::min_rate_for_tda(100, 100, kAlpha01) ==
        doctest::Approx(0.9377793122841771).epsilon(1e-12));
  CHECK(fmd::min_rate_for_tda(25000, 0, kAlpha01) == 0.0);
  CHECK_THROWS_AS(fmd::min_rate_for_tda(100, 101, kAlpha01), std::invalid_argument);

  // The grid scan must land on the closed form rounded up to the grid.
  double closed = fmd::min_rate_for_tda(25000, 50, kAlpha01);
  double scanned = fmd::min_rate_for_tda_scan(25000, 50, kAlpha01, 1e-5);
  CHECK(scanned >= closed);
  CHECK(scanned - closed < 1e-5 + 1e-12);
  CHECK(scanned == doctest::Approx(0.01485).epsilon(1e-9));
}

TEST_CASE("confusion stats bookkeeping") {
  fmd::ConfusionStats c;
  CHECK(c.precision() == 0.0);
  CHECK(c.recall() == 0.0);
  c.add(true, true);
  c.add(true, false);
  c.add(false, true);
  c.add(false, false);
  CHECK(c.true_positive == 1);
  CHECK(c.false_positive == 1);
  CHECK(c.false_negative == 1);
  CHECK(c.true_negative == 1);
  CHECK(c.precision() == doctest::Approx(0.5));
  CHECK(c.recall() == doctest::Approx(0.5));
  fmd::ConfusionStats d;
  d.add(true, true);
  c.merge(d);
  CHECK(c.true_positive == 2);
  CHECK(c.recall() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("relationship scan at rate zero recovers the exact graph") {
  fmd::CommGraph graph = fmd_test::make_graph({
      {0, 1, 1}, {0, 1, 2}, {0, 2, 3}, {1, 2, 4}, {2, 0, 5}, {3, 0, 6},
  });
  fmd::DegreeStats stats = fmd::degree_stats(graph);
  fmd::RateAssignment rates;
  rates.rates.assign(graph.user_count, fmd::DetectionRate::from_value(0.0));
  fmd::SimulationRun run{3, 0, fmd::Backend::aggregated};
  fmd::TagTable table = fmd::simulate(graph, stats, rates, run);

  fmd::RelationshipScanResult result = fmd::relationship_scan(table, stats, rates, kAlpha01);
  CHECK(result.confusion.false_positive == 0);
  CHECK(result.confusion.false_negative == 0);
  CHECK(result.confusion.true_positive == 5);  // distinct ordered sender->recipient pairs
  CHECK(result.confusion.precision() == 1.0);
  CHECK(result.confusion.recall() == 1.0);
  // All four users sent at least one message: tested = U*(U-1).
  CHECK(result.meta.tested == 12);
  CHECK(static_cast<std::int64_t>(result.flagged.size()) == 5);
}

TEST_CASE("relationship scan skips silent senders and counts them nowhere") {
  fmd::CommGraph graph = fmd_test::make_graph({{0, 1, 1}, {0, 2, 2}});
  fmd::DegreeStats stats = fmd::degree_stats(graph);
  fmd::RateAssignment rates;
  rates.rates.assign(graph.user_count, fmd::DetectionRate::from_value(0.0));
  fmd::SimulationRun run{3, 0, fmd::Backend::aggregated};
  fmd::TagTable table = fmd::simulate(graph, stats, rates, run);
  fmd::RelationshipScanResult result = fmd::relationship_scan(table, stats, rates, kAlpha01);
  // Users 1 and 2 never sent: only sender 0's two candidate recipients.
  CHECK(result.meta.tested == 2);
  CHECK(result.confusion.true_positive == 2);
  CHECK(result.confusion.true_negative == 0);
}

TEST_CASE("unordered scan merges directions into one unit") {
  fmd::CommGraph graph = fmd_test::make_graph({{0, 1, 1}, {0, 1, 2}, {2, 0, 3}});
  fmd::DegreeStats stats = fmd::degree_stats(graph);
  fmd::RateAssignment rates;
  rates.rates.assign(graph.user_count, fmd::DetectionRate::from_value(0.0));
  fmd::SimulationRun run{3, 0, fmd::Backend::aggregated};
  fmd::TagTable table = fmd::simulate(graph, stats, rates, run);

  fmd::RelationshipScanResult ordered = fmd::relationship_scan(table, stats, rates, kAlpha01);
  // Senders 0 and 2; 0 tests {1, 2}, 2 tests {0, 1}.
  CHECK(ordered.confusion.true_positive == 2);
  CHECK(ordered.confusion.true_negative == 2);

  fmd::RelationshipScanResult merged =
      fmd::relationship_scan(table, stats, rates, kAlpha01, true);
  // Units: {0,1} truth=1, {0,2} truth=1, {1,2} truth=0 (only direction 2->1
  // is testable; 1 sent nothing).
  std::int64_t units = merged.confusion.true_positive + merged.confusion.false_positive +
                       merged.confusion.false_negative + merged.confusion.true_negative;
  CHECK(units == 3);
  CHECK(merged.confusion.true_positive == 2);
  CHECK(merged.confusion.true_negative == 1);
  CHECK(merged.confusion.false_negative == 0);
}

TEST_CASE("scan sink sees every tested row") {
  fmd::CommGraph graph = fmd_test::make_graph({{0, 1, 1}, {1, 0, 2}, {0, 2, 3}});
  fmd::DegreeStats stats = fmd::degree_stats(graph);
  fmd::RateAssignment rates;
  rates.rates.assign(graph.user_count, fmd::DetectionRate::from_value(0.0));
  fmd::SimulationRun run{3, 0, fmd::Backend::aggregated};
  fmd::TagTable table = fmd::simulate(graph, stats, rates, run);

  std::int64_t rows = 0;
  std::int64_t flagged_rows = 0;
  fmd::RelationshipScanResult result = fmd::relationship_scan(
      table, stats, rates, kAlpha01, false, [&](const fmd::PairTestResult& r, bool truth) {
        ++rows;
        if (r.verdict == fmd::Verdict::flagged) {
          ++flagged_rows;
          CHECK(truth);  // rate 0 flags exactly the true pairs
        }
      });
  CHECK(rows == result.meta.tested);
  CHECK(flagged_rows == static_cast<std::int64_t>(result.flagged.size()));
}

TEST_CASE("relationship scan false-positive rate sits near alpha under the null") {
  // One hub sends 300 messages to a single partner; 150 bystanders never
  // receive from it. Across folds the per-pair flag rate must track alpha.
  std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>> edges;
  for (int t = 0; t < 300; ++t) edges.emplace_back(0, 1, t + 1);
  for (int u = 2; u < 152; ++u) edges.emplace_back(u, 1, 1000 + u);
  fmd::CommGraph graph = fmd_test::make_graph(edges);
  fmd::DegreeStats stats = fmd::degree_stats(graph);
  fmd::RateAssignment rates;
  rates.rates.assign(graph.user_count, fmd::dyadic_rate(2));

  std::int64_t null_pairs = 0;
  std::int64_t flagged = 0;
  for (std::uint32_t fold = 0; fold < 30; ++fold) {
    fmd::SimulationRun run{404, fold, fmd::Backend::aggregated};
    fmd::TagTable table = fmd::simulate(graph, stats, rates, run);
    fmd::relationship_scan(table, stats, rates, kAlpha01, false,
                           [&](const fmd::PairTestResult& r, bool truth) {
                             if (truth || r.sender != 0) return;
                             ++null_pairs;
                             if (r.verdict == fmd::Verdict::flagged) ++flagged;
                           });
  }
  // 30 folds x 150 null pairs; the two-sided normal test rejects ~alpha of
  // them (discreteness keeps it in the same ballpark, not exact).
  CHECK(null_pairs == 30 * 150);
  double rate = static_cast<double>(flagged) / static_cast<double>(null_pairs);
  CHECK_MESSAGE(rate < 0.03, "rate=", rate);
  CHECK_MESSAGE(rate > 0.001, "rate=", rate);
}

TEST_CASE("tda scan predicts only the excess side and tracks ground truth") {
  // 40 users, heavy traffic to user 0 in epoch 0 only.
  std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>> edges;
  for (int t = 0; t < 200; ++t) edges.emplace_back(1 + (t % 39), 0, t);
  for (int t = 0; t < 200; ++t) edges.emplace_back(1 + (t % 39), 2 + (t % 37), 10000 + t);
  fmd::CommGraph graph = fmd_test::make_graph(edges);
  // Dense ids follow first appearance; find where original id 0 landed.
  std::uint32_t target = 0;
  for (std::uint32_t u = 0; u < graph.user_count; ++u) {
    if (graph.original_ids[u] == 0) target = u;
  }
  fmd::RateAssignment rates;
  rates.rates.assign(graph.user_count, fmd::dyadic_rate(2));
  fmd::SimulationRun run{11, 0, fmd::Backend::per_message};
  fmd::EpochPartition epochs = fmd::partition_epochs(graph, rates, run, 200);
  REQUIRE(epochs.epoch_count == 2);
  CHECK(epochs.genuine_at(0, target) == 200);
  CHECK(epochs.genuine_at(1, target) == 0);

  fmd::TdaScanResult result = fmd::tda_scan(epochs, rates, kAlpha01);
  CHECK(result.meta.tested == static_cast<std::int64_t>(2 * graph.user_count));
  // The hot user in epoch 0: observed 200 genuine + fuzz vs mean 50 -> flag.
  bool found = false;
  for (const fmd::TdaRow& row : result.rows) {
    if (row.epoch == 0 && row.user == target) {
      found = true;
      CHECK(row.truth);
      CHECK(row.test.verdict == fmd::Verdict::flagged);
      CHECK(row.test.statistic > 0.0);
    }
    // Nothing on the deficit side may be predicted positive.
    if (row.test.verdict == fmd::Verdict::flagged && row.test.statistic < 0.0) {
      CHECK_FALSE(row.truth);
    }
  }
  CHECK(found);
  CHECK(result.confusion.recall() > 0.0);
}

TEST_CASE("relationship CSV row format") {
  fmd::PairTestResult r = fmd::rel_anon_test(11.0, 100, fmd::DetectionRate::from_value(0.05),
                                             kAlpha01);
  std::ostringstream out;
  fmd::write_relationship_header(out);
  fmd::write_relationship_row(out, 500, 600, r, true);
  std::string csv = out.str();
  CHECK(csv.find("sender,recipient,observed,mean,std,statistic,quantile,flagged,truth") == 0);
  CHECK(csv.find("500,600,11,5,") != std::string::npos);
  CHECK(csv.find(",1,1\n") != std::string::npos);
}

TEST_CASE("tda CSV reports original user ids") {
  fmd::CommGraph graph = fmd_test::make_graph({{700, 800, 1}, {800, 700, 2}});
  fmd::RateAssignment rates;
  rates.rates.assign(graph.user_count, fmd::DetectionRate::from_value(0.0));
  fmd::SimulationRun run{2, 0, fmd::Backend::per_message};
  fmd::EpochPartition epochs = fmd::partition_epochs(graph, rates, run, 2);
  fmd::TdaScanResult result = fmd::tda_scan(epochs, rates, kAlpha01);
  std::ostringstream out;
  fmd::write_tda_csv(result, graph, out);
  std::string csv = out.str();
  CHECK(csv.find("epoch,user,observed,expected,statistic,flagged,truth") == 0);
  CHECK(csv.find("0,700,") != std::string::npos);
  CHECK(csv.find("0,800,") != std::string::npos);
}

}  // namespace
