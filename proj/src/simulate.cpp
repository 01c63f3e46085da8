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

#include "fmd/simulate.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>

namespace fmd {

namespace {
constexpr std::uint32_t kDensePairCap = 4096;

std::int64_t draw_pair_tags(const DegreeStats& stats, const RateAssignment& rates,
                            std::uint64_t seed, std::uint32_t fold, std::uint32_t v,
                            std::uint32_t u) {
  std::int64_t genuine = stats.pair_count(v, u);
  std::int64_t pool = stats.out_degree[v] - genuine;
  KeyedStream stream = make_stream(seed, fold, StreamDomain::aggregated_pair, pair_entity(v, u));
  return genuine + binomial_draw(stream, pool, rates.rate(u).value());
}
}  // namespace

TagTable::TagTable(std::uint32_t user_count, std::int64_t message_count)
    : n_(user_count), message_count_(message_count) {
  if (user_count > kDensePairCap) {
    throw std::length_error("TagTable: dense pair storage capped at 4096 users; use LazyTagView");
  }
  if (message_count < 0) throw std::invalid_argument("TagTable: negative message count");
  pairs_.assign(static_cast<std::size_t>(n_) * n_, 0);
  totals_.assign(n_, 0);
}

std::int64_t TagTable::pair_tags(std::uint32_t sender, std::uint32_t recipient) const {
  return pairs_[static_cast<std::size_t>(sender) * n_ + recipient];
}

std::int64_t TagTable::fuzzy_edge_count() const {
  std::int64_t sum = std::accumulate(totals_.begin(), totals_.end(), std::int64_t{0});
  return sum - message_count_;
}

void TagTable::add_tag(std::uint32_t sender, std::uint32_t recipient) {
  ++pairs_[static_cast<std::size_t>(sender) * n_ + recipient];
  ++totals_[recipient];
}

void TagTable::add_pair(std::uint32_t sender, std::uint32_t recipient, std::int64_t tags) {
  pairs_[static_cast<std::size_t>(sender) * n_ + recipient] += static_cast<std::int32_t>(tags);
  totals_[recipient] += tags;
}

TagTable simulate_per_message(const CommGraph& graph, const RateAssignment& rates,
                              const SimulationRun& run) {
  if (rates.rates.size() != graph.user_count) {
    throw std::invalid_argument("simulate_per_message: rates must cover all users");
  }
  TagTable table(graph.user_count, graph.message_count());
  for (std::uint32_t u = 0; u < graph.user_count; ++u) {
    KeyedStream stream = make_stream(run.seed, run.fold, StreamDomain::per_message, u);
    double p = rates.rate(u).value();
    for (const MessageEvent& e : graph.events) {
      if (e.recipient == u) {
        table.add_tag(e.sender, u);
      } else if (stream.bernoulli(p)) {
        table.add_tag(e.sender, u);
      }
    }
  }
  return table;
}

TagTable simulate_aggregated(const CommGraph& graph, const DegreeStats& stats,
                             const RateAssignment& rates, const SimulationRun& run) {
  if (rates.rates.size() != graph.user_count) {
    throw std::invalid_argument("simulate_aggregated: rates must cover all users");
  }
  TagTable table(graph.user_count, graph.message_count());
  for (std::uint32_t v = 0; v < graph.user_count; ++v) {
    if (stats.out_degree[v] == 0) continue;
    for (std::uint32_t u = 0; u < graph.user_count; ++u) {
      std::int64_t tags = draw_pair_tags(stats, rates, run.seed, run.fold, v, u);
      if (tags > 0) table.add_pair(v, u, tags);
    }
  }
  return table;
}

TagTable simulate(const CommGraph& graph, const DegreeStats& stats, const RateAssignment& rates,
                  const SimulationRun& run) {
  return run.backend == Backend::per_message ? simulate_per_message(graph, rates, run)
                                             : simulate_aggregated(graph, stats, rates, run);
}

LazyTagView::LazyTagView(const DegreeStats& stats, const RateAssignment& rates, std::uint64_t seed,
                         std::uint32_t fold)
    : stats_(&stats), rates_(&rates), seed_(seed), fold_(fold) {
  if (rates.rates.size() != stats.in_degree.size()) {
    throw std::invalid_argument("LazyTagView: rates must cover all users");
  }
}

std::uint32_t LazyTagView::user_count() const { return stats_->user_count(); }

std::int64_t LazyTagView::pair_tags(std::uint32_t sender, std::uint32_t recipient) const {
  if (stats_->out_degree[sender] == 0) return 0;
  return draw_pair_tags(*stats_, *rates_, seed_, fold_, sender, recipient);
}

std::int64_t LazyTagView::total(std::uint32_t recipient) const {
  std::int64_t sum = 0;
  for (std::uint32_t v = 0; v < stats_->user_count(); ++v) {
    if (stats_->out_degree[v] == 0) continue;
    sum += draw_pair_tags(*stats_, *rates_, seed_, fold_, v, recipient);
  }
  return sum;
}

EpochPartition partition_epochs(const CommGraph& graph, const RateAssignment& rates,
                                const SimulationRun& run, std::int64_t epoch_size,
                                bool random_sample) {
  if (epoch_size < 1) throw std::invalid_argument("partition_epochs: epoch_size must be >= 1");
  if (rates.rates.size() != graph.user_count) {
    throw std::invalid_argument("partition_epochs: rates must cover all users");
  }
  const std::size_t m = graph.events.size();
  const std::uint32_t n = graph.user_count;

  EpochPartition part;
  part.epoch_size = epoch_size;
  part.user_count = n;
  part.epoch_count = (m + static_cast<std::size_t>(epoch_size) - 1) / static_cast<std::size_t>(epoch_size);

  std::vector<std::uint32_t> epoch_of(m);
  if (random_sample) {
    // Seeded permutation; epoch e holds the messages at permuted positions
    // [e*size, (e+1)*size).
    std::vector<std::uint32_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0u);
    KeyedStream shuffle = make_stream(run.seed, run.fold, StreamDomain::epoch_pair, 0);
    for (std::size_t i = m; i > 1; --i) {
      std::size_t j = shuffle.uniform_index(i);
      std::swap(perm[i - 1], perm[j]);
    }
    for (std::size_t pos = 0; pos < m; ++pos) {
      epoch_of[perm[pos]] = static_cast<std::uint32_t>(pos / static_cast<std::size_t>(epoch_size));
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      epoch_of[i] = static_cast<std::uint32_t>(i / static_cast<std::size_t>(epoch_size));
    }
    for (std::size_t e = 0; e < part.epoch_count; ++e) {
      std::size_t begin = e * static_cast<std::size_t>(epoch_size);
      part.boundaries.emplace_back(begin, std::min(m, begin + static_cast<std::size_t>(epoch_size)));
    }
  }

  part.epoch_messages.assign(part.epoch_count, 0);
  for (std::size_t i = 0; i < m; ++i) ++part.epoch_messages[epoch_of[i]];

  part.genuine.assign(part.epoch_count * n, 0);
  part.tags.assign(part.epoch_count * n, 0);
  // Same streams as simulate_per_message, so epoch tags are that realization
  // split by epoch.
  for (std::uint32_t u = 0; u < n; ++u) {
    KeyedStream stream = make_stream(run.seed, run.fold, StreamDomain::per_message, u);
    double p = rates.rate(u).value();
    for (std::size_t i = 0; i < m; ++i) {
      const MessageEvent& e = graph.events[i];
      std::size_t slot = static_cast<std::size_t>(epoch_of[i]) * n + u;
      if (e.recipient == u) {
        ++part.genuine[slot];
        ++part.tags[slot];
      } else if (stream.bernoulli(p)) {
        ++part.tags[slot];
      }
    }
  }
  return part;
}

void write_tag_table_csv(const TagSource& table, const DegreeStats& stats, const CommGraph& graph,
                         std::ostream& out) {
  out << "sender,recipient,genuine,tags\n";
  for (std::uint32_t v = 0; v < table.user_count(); ++v) {
    if (stats.out_degree[v] == 0) continue;
    for (std::uint32_t u = 0; u < table.user_count(); ++u) {
      std::int64_t tags = table.pair_tags(v, u);
      std::int64_t genuine = stats.pair_count(v, u);
      if (tags == 0 && genuine == 0) continue;
      out << graph.original_ids[v] << ',' << graph.original_ids[u] << ',' << genuine << ','
          << tags << '\n';
    }
  }
}

void write_epoch_csv(const EpochPartition& epochs, const CommGraph& graph, std::ostream& out) {
  out << "epoch,user,genuine,tags\n";
  for (std::size_t e = 0; e < epochs.epoch_count; ++e) {
    for (std::uint32_t u = 0; u < epochs.user_count; ++u) {
      out << e << ',' << graph.original_ids[u] << ',' << epochs.genuine_at(e, u) << ','
          << epochs.tags_at(e, u) << '\n';
    }
  }
}

}  // namespace fmd
