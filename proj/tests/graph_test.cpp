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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fmd/graph.hpp"
#include "fmd/rng.hpp"
#include "test_support.hpp"

namespace {

fmd::CommGraph parse(const std::string& text) {
  std::istringstream in(text);
  return fmd::load_edge_stream(in, "<test>");
}

TEST_CASE("loader skips comments, drops self-loops, and re-indexes densely") {
  fmd::CommGraph g = parse(
      "# comment line\n"
      "% another comment\n"
      "\n"
      "1004 9 50\n"
      "9 9 60\n"
      "7 1004 10\n"
      "9 7 30\n");
  CHECK(g.user_count == 3);
  CHECK(g.message_count() == 3);
  CHECK(g.self_loops_dropped == 1);
  // First-appearance order over surviving edges: 1004, 9, 7.
  REQUIRE(g.original_ids.size() == 3);
  CHECK(g.original_ids[0] == 1004);
  CHECK(g.original_ids[1] == 9);
  CHECK(g.original_ids[2] == 7);
  // Events sorted by timestamp.
  CHECK(g.events[0].timestamp == 10);
  CHECK(g.events[1].timestamp == 30);
  CHECK(g.events[2].timestamp == 50);
  CHECK(g.events[2].sender == 0);     // 1004
  CHECK(g.events[2].recipient == 1);  // 9
}

TEST_CASE("timestamp sort is stable for duplicates") {
  fmd::CommGraph g = parse(
      "1 2 5\n"
      "3 4 5\n"
      "5 6 5\n");
  CHECK(g.events[0].sender == 0);
  CHECK(g.events[1].sender == 2);
  CHECK(g.events[2].sender == 4);
  CHECK(g.message_count() == 3);  // duplicates are kept
}

TEST_CASE("loader reports malformed lines with their line number") {
  CHECK_THROWS_WITH_AS(parse("1 2 3\nnot numbers\n"), doctest::Contains("<test>:2"),
                       std::runtime_error);
  CHECK_THROWS_AS(parse("1 2 3\n4 5 6 7\n"), std::runtime_error);   // extra token
  CHECK_THROWS_AS(parse("-1 2 3\n"), std::runtime_error);           // negative id
  CHECK_THROWS_AS(parse("1 2\n"), std::runtime_error);              // missing field
  CHECK_THROWS_AS(parse("# only comments\n"), std::runtime_error);  // no events
  CHECK_THROWS_AS(fmd::load_edge_list("/nonexistent/file.txt"), std::runtime_error);
}

TEST_CASE("save and reload round-trips the labeled graph") {
  fmd::CommGraph g = parse(
      "1004 9 50\n"
      "7 1004 10\n"
      "9 7 30\n"
      "7 9 30\n");
  std::filesystem::path path =
      std::filesystem::temp_directory_path() / "fmd_graph_roundtrip.txt";
  fmd::save_edge_list(g, path.string());
  fmd::CommGraph g2 = fmd::load_edge_list(path.string());
  std::filesystem::remove(path);
  REQUIRE(g2.message_count() == g.message_count());
  CHECK(g2.user_count == g.user_count);
  // Dense indices follow first-appearance order, which the timestamp sort may
  // change; equality must hold in original-id space.
  for (std::size_t i = 0; i < g.events.size(); ++i) {
    CHECK(g2.original_ids[g2.events[i].sender] == g.original_ids[g.events[i].sender]);
    CHECK(g2.original_ids[g2.events[i].recipient] == g.original_ids[g.events[i].recipient]);
    CHECK(g2.events[i].timestamp == g.events[i].timestamp);
  }
}

TEST_CASE("degree_stats counts degrees and pair multiplicities") {
  fmd::CommGraph g = parse(
      "0 1 1\n"
      "0 1 2\n"
      "0 2 3\n"
      "1 2 4\n"
      "2 0 5\n");
  fmd::DegreeStats stats = fmd::degree_stats(g);
  REQUIRE(stats.user_count() == 3);
  CHECK(stats.out_degree[0] == 3);
  CHECK(stats.out_degree[1] == 1);
  CHECK(stats.out_degree[2] == 1);
  CHECK(stats.in_degree[0] == 1);
  CHECK(stats.in_degree[1] == 2);
  CHECK(stats.in_degree[2] == 2);
  CHECK(stats.pair_count(0, 1) == 2);
  CHECK(stats.pair_count(0, 2) == 1);
  CHECK(stats.pair_count(1, 2) == 1);
  CHECK(stats.pair_count(1, 0) == 0);
  CHECK(stats.pair_count(2, 2) == 0);

  // Sum of pair counts per sender equals out-degree; global sums match M.
  std::int64_t total_out = std::accumulate(stats.out_degree.begin(), stats.out_degree.end(),
                                           std::int64_t{0});
  std::int64_t total_in = std::accumulate(stats.in_degree.begin(), stats.in_degree.end(),
                                          std::int64_t{0});
  CHECK(total_out == g.message_count());
  CHECK(total_in == g.message_count());
  for (std::uint32_t v = 0; v < 3; ++v) {
    auto [begin, end] = stats.sender_range(v);
    std::int64_t sum = 0;
    for (std::size_t i = begin; i < end; ++i) sum += stats.pair_entries[i].second;
    CHECK(sum == stats.out_degree[v]);
  }
}

TEST_CASE("degree_stats is invariant under event order permutation") {
  // Same multiset of edges, shuffled timestamps: degrees must not change.
  fmd::CommGraph a = parse("0 1 1\n0 2 2\n1 2 3\n2 0 4\n0 1 5\n");
  fmd::CommGraph b = parse("0 1 5\n2 0 1\n0 2 4\n0 1 2\n1 2 3\n");
  fmd::DegreeStats sa = fmd::degree_stats(a);
  fmd::DegreeStats sb = fmd::degree_stats(b);
  CHECK(sa.in_degree == sb.in_degree);
  CHECK(sa.out_degree == sb.out_degree);
  for (std::uint32_t v = 0; v < 3; ++v) {
    for (std::uint32_t u = 0; u < 3; ++u) {
      CHECK(sa.pair_count(v, u) == sb.pair_count(v, u));
    }
  }
}

TEST_CASE("assign_rates draws uniformly over the rate set") {
  // 3000 users, 3 rates: each bucket is Binomial(3000, 1/3).
  std::ostringstream text;
  for (int u = 0; u + 1 < 3000; ++u) text << u << ' ' << (u + 1) << ' ' << u << '\n';
  text << 2999 << ' ' << 0 << ' ' << 2999 << '\n';
  fmd::CommGraph g = parse(text.str());
  REQUIRE(g.user_count == 3000);

  std::vector<fmd::DetectionRate> rate_set = {fmd::dyadic_rate(1), fmd::dyadic_rate(2),
                                              fmd::dyadic_rate(3)};
  fmd::KeyedStream rng = fmd::make_stream(17, 0, fmd::StreamDomain::rate_assign, 0);
  fmd::RateAssignment assignment = fmd::assign_rates(g, rate_set, rng);
  REQUIRE(assignment.rates.size() == 3000);

  std::vector<std::int64_t> counts(3, 0);
  for (const fmd::DetectionRate& r : assignment.rates) {
    REQUIRE(r.dyadic_exponent().has_value());
    ++counts[*r.dyadic_exponent() - 1];
  }
  for (int b = 0; b < 3; ++b) {
    CHECK(fmd_test::binomial_mean_within(counts[b], 3000, 1.0 / 3.0));
  }

  // Deterministic given the stream state.
  fmd::KeyedStream rng2 = fmd::make_stream(17, 0, fmd::StreamDomain::rate_assign, 0);
  fmd::RateAssignment again = fmd::assign_rates(g, rate_set, rng2);
  for (std::size_t i = 0; i < assignment.rates.size(); ++i) {
    CHECK(assignment.rates[i].value() == again.rates[i].value());
  }

  fmd::KeyedStream rng3 = fmd::make_stream(17, 0, fmd::StreamDomain::rate_assign, 0);
  CHECK_THROWS_AS(fmd::assign_rates(g, {}, rng3), std::invalid_argument);
}

TEST_CASE("write_degree_csv reports original ids") {
  fmd::CommGraph g = parse("1004 9 50\n9 1004 60\n");
  fmd::DegreeStats stats = fmd::degree_stats(g);
  fmd::KeyedStream rng = fmd::make_stream(1, 0, fmd::StreamDomain::rate_assign, 0);
  fmd::RateAssignment rates = fmd::assign_rates(g, {fmd::dyadic_rate(2)}, rng);
  std::ostringstream out;
  fmd::write_degree_csv(g, stats, rates, out);
  std::string csv = out.str();
  CHECK(csv.find("user_id,in_degree,out_degree,rate") == 0);
  CHECK(csv.find("1004,1,1,0.25") != std::string::npos);
  CHECK(csv.find("9,1,1,0.25") != std::string::npos);
}

}  // namespace
