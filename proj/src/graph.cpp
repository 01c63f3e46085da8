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

#include "fmd/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace fmd {
namespace {

bool parse_int64(std::string_view token, std::int64_t* out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

[[noreturn]] void parse_fail(const std::string& name, std::size_t line_no, const std::string& line) {
  std::ostringstream msg;
  msg << name << ":" << line_no << ": malformed edge line: \"" << line << "\"";
  throw std::runtime_error(msg.str());
}

}  // namespace

CommGraph load_edge_stream(std::istream& in, const std::string& name) {
  struct RawEdge {
    std::int64_t src, dst, ts;
  };
  std::vector<RawEdge> raw;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t self_loops = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    if (line[begin] == '#' || line[begin] == '%') continue;

    std::istringstream fields(line);
    std::string tok[3];
    if (!(fields >> tok[0] >> tok[1] >> tok[2])) parse_fail(name, line_no, line);
    std::string extra;
    if (fields >> extra) parse_fail(name, line_no, line);

    RawEdge e;
    if (!parse_int64(tok[0], &e.src) || !parse_int64(tok[1], &e.dst) || !parse_int64(tok[2], &e.ts) ||
        e.src < 0 || e.dst < 0) {
      parse_fail(name, line_no, line);
    }
    if (e.src == e.dst) {
      ++self_loops;
      continue;
    }
    raw.push_back(e);
  }
  if (raw.empty()) {
    throw std::runtime_error(name + ": no events (empty or comment-only input)");
  }

  // Dense re-index in first-appearance order (file order, pre-sort).
  CommGraph g;
  g.self_loops_dropped = self_loops;
  std::unordered_map<std::int64_t, std::uint32_t> index;
  index.reserve(raw.size() / 4 + 16);
  auto dense = [&](std::int64_t id) {
    auto [it, inserted] = index.try_emplace(id, static_cast<std::uint32_t>(g.original_ids.size()));
    if (inserted) g.original_ids.push_back(id);
    return it->second;
  };
  g.events.reserve(raw.size());
  for (const RawEdge& e : raw) {
    g.events.push_back({dense(e.src), dense(e.dst), e.ts});
  }
  g.user_count = static_cast<std::uint32_t>(g.original_ids.size());
  // Stable: equal timestamps keep file order.
  std::stable_sort(g.events.begin(), g.events.end(),
                   [](const MessageEvent& a, const MessageEvent& b) { return a.timestamp < b.timestamp; });
  return g;
}

CommGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  return load_edge_stream(in, path);
}

void save_edge_list(const CommGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const MessageEvent& e : graph.events) {
    out << graph.original_ids[e.sender] << ' ' << graph.original_ids[e.recipient] << ' '
        << e.timestamp << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

RateAssignment assign_rates(const CommGraph& graph, const std::vector<DetectionRate>& rate_set,
                            KeyedStream& rng) {
  if (rate_set.empty()) throw std::invalid_argument("assign_rates: rate_set must be non-empty");
  RateAssignment assignment;
  assignment.rates.reserve(graph.user_count);
  for (std::uint32_t u = 0; u < graph.user_count; ++u) {
    assignment.rates.push_back(rate_set[rng.uniform_index(rate_set.size())]);
  }
  return assignment;
}

std::int64_t DegreeStats::pair_count(std::uint32_t v, std::uint32_t u) const {
  auto first = pair_entries.begin() + static_cast<std::ptrdiff_t>(pair_offset[v]);
  auto last = pair_entries.begin() + static_cast<std::ptrdiff_t>(pair_offset[v + 1]);
  auto it = std::lower_bound(first, last, u,
                             [](const auto& entry, std::uint32_t key) { return entry.first < key; });
  if (it != last && it->first == u) return it->second;
  return 0;
}

DegreeStats degree_stats(const CommGraph& graph) {
  const std::uint32_t n = graph.user_count;
  DegreeStats s;
  s.in_degree.assign(n, 0);
  s.out_degree.assign(n, 0);
  for (const MessageEvent& e : graph.events) {
    ++s.out_degree[e.sender];
    ++s.in_degree[e.recipient];
  }

  // Pair counts: bucket events by sender, then sort-and-merge per sender.
  s.pair_offset.assign(n + 1, 0);
  std::vector<std::uint32_t> by_sender(graph.events.size());
  {
    std::vector<std::size_t> cursor(n, 0);
    std::size_t acc = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      cursor[v] = acc;
      acc += static_cast<std::size_t>(s.out_degree[v]);
    }
    for (const MessageEvent& e : graph.events) {
      by_sender[cursor[e.sender]++] = e.recipient;
    }
  }
  std::size_t pos = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    s.pair_offset[v] = s.pair_entries.size();
    std::size_t end = pos + static_cast<std::size_t>(s.out_degree[v]);
    std::sort(by_sender.begin() + static_cast<std::ptrdiff_t>(pos),
              by_sender.begin() + static_cast<std::ptrdiff_t>(end));
    while (pos < end) {
      std::uint32_t u = by_sender[pos];
      std::int64_t count = 0;
      while (pos < end && by_sender[pos] == u) {
        ++count;
        ++pos;
      }
      s.pair_entries.emplace_back(u, count);
    }
  }
  s.pair_offset[n] = s.pair_entries.size();
  return s;
}

void write_degree_csv(const CommGraph& graph, const DegreeStats& stats,
                      const RateAssignment& rates, std::ostream& out) {
  out << "user_id,in_degree,out_degree,rate\n";
  for (std::uint32_t u = 0; u < graph.user_count; ++u) {
    out << graph.original_ids[u] << ',' << stats.in_degree[u] << ',' << stats.out_degree[u] << ','
        << rates.rate(u).value() << '\n';
  }
}

}  // namespace fmd
