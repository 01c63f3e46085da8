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

#ifndef FMD_GRAPH_HPP_
#define FMD_GRAPH_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fmd/detection.hpp"

namespace fmd {

// A temporal communication graph: directed message events sorted by
// timestamp, with user ids re-indexed densely from 0.
struct CommGraph {
  std::vector<MessageEvent> events;      // sorted by timestamp (stable)
  std::uint32_t user_count = 0;          // U
  std::vector<std::int64_t> original_ids;  // dense index -> id in the input file
  std::uint64_t self_loops_dropped = 0;

  std::int64_t message_count() const { return static_cast<std::int64_t>(events.size()); }
};

// Parses "source target timestamp" lines; '#' or '%' prefixed lines and blank
// lines are ignored. Self-loops are dropped and counted. Ids are re-indexed in
// first-appearance order. Throws std::runtime_error with the line number on a
// malformed line and on empty input (no events).
CommGraph load_edge_list(const std::string& path);
CommGraph load_edge_stream(std::istream& in, const std::string& name);

// Writes events (original ids, current order) in the input format; loading the
// result reproduces the same labeled event sequence, though dense indices may
// be assigned differently when sorting changed first-appearance order.
void save_edge_list(const CommGraph& graph, const std::string& path);

struct RateAssignment {
  std::vector<DetectionRate> rates;  // indexed by dense user id

  const DetectionRate& rate(std::uint32_t u) const { return rates.at(u); }
};

// Each user independently draws a uniform element of rate_set from rng, in
// user-index order. Throws std::invalid_argument on an empty rate_set.
RateAssignment assign_rates(const CommGraph& graph, const std::vector<DetectionRate>& rate_set,
                            KeyedStream& rng);

// Degree statistics: in(u), out(u), and sparse pair counts in_v(u) stored in
// CSR layout keyed by sender.
struct DegreeStats {
  std::vector<std::int64_t> in_degree;
  std::vector<std::int64_t> out_degree;
  std::vector<std::size_t> pair_offset;                        // size U+1
  std::vector<std::pair<std::uint32_t, std::int64_t>> pair_entries;  // (recipient, in_v(u))

  std::uint32_t user_count() const { return static_cast<std::uint32_t>(in_degree.size()); }

  // in_v(u); 0 when the pair never communicated.
  std::int64_t pair_count(std::uint32_t v, std::uint32_t u) const;

  // Entries for sender v as a [begin, end) range into pair_entries.
  std::pair<std::size_t, std::size_t> sender_range(std::uint32_t v) const {
    return {pair_offset[v], pair_offset[v + 1]};
  }
};

DegreeStats degree_stats(const CommGraph& graph);

// CSV dump "user_id,in_degree,out_degree,rate" (original user ids).
void write_degree_csv(const CommGraph& graph, const DegreeStats& stats,
                      const RateAssignment& rates, std::ostream& out);

}  // namespace fmd

#endif  // FMD_GRAPH_HPP_
