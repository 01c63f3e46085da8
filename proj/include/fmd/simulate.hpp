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

#ifndef FMD_SIMULATE_HPP_
#define FMD_SIMULATE_HPP_

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "fmd/graph.hpp"

namespace fmd {

enum class Backend { per_message, aggregated };

// (seed, fold) fully determine every simulated quantity for a fixed backend.
struct SimulationRun {
  std::uint64_t seed = 0;
  std::uint32_t fold = 0;
  Backend backend = Backend::aggregated;
};

// Read-only view of the server's observable download counts.
class TagSource {
 public:
  virtual ~TagSource() = default;
  virtual std::uint32_t user_count() const = 0;
  virtual std::int64_t pair_tags(std::uint32_t sender, std::uint32_t recipient) const = 0;
  virtual std::int64_t total(std::uint32_t recipient) const = 0;
};

// Materialized download table. Dense pair storage; construction is capped at
// 4096 users (use LazyTagView beyond that).
class TagTable : public TagSource {
 public:
  TagTable(std::uint32_t user_count, std::int64_t message_count);

  std::uint32_t user_count() const override { return n_; }
  std::int64_t pair_tags(std::uint32_t sender, std::uint32_t recipient) const override;
  std::int64_t total(std::uint32_t recipient) const override { return totals_[recipient]; }

  std::int64_t message_count() const { return message_count_; }
  std::int64_t fuzzy_edge_count() const;  // sum of totals minus message count

  void add_tag(std::uint32_t sender, std::uint32_t recipient);
  void add_pair(std::uint32_t sender, std::uint32_t recipient, std::int64_t tags);

 private:
  std::uint32_t n_;
  std::int64_t message_count_;
  std::vector<std::int32_t> pairs_;  // n*n, row = sender
  std::vector<std::int64_t> totals_;
};

// Faithful backend: every (message, user) pair gets one Bernoulli draw from
// the user's stream; the recipient always downloads.
TagTable simulate_per_message(const CommGraph& graph, const RateAssignment& rates,
                              const SimulationRun& run);

// Aggregated backend: tag_v(u) = in_v(u) + Binom(out(v) - in_v(u), p(u)) from
// a per-pair stream. Totals include the sender's own pair (v = u), so
// tag(u) = in(u) + Binom(M - in(u), p(u)) exactly in distribution.
TagTable simulate_aggregated(const CommGraph& graph, const DegreeStats& stats,
                             const RateAssignment& rates, const SimulationRun& run);

TagTable simulate(const CommGraph& graph, const DegreeStats& stats, const RateAssignment& rates,
                  const SimulationRun& run);

// Same distribution as simulate_aggregated, draw-for-draw identical, but pairs
// are computed on demand instead of materialized. Scales past the dense cap.
class LazyTagView : public TagSource {
 public:
  LazyTagView(const DegreeStats& stats, const RateAssignment& rates, std::uint64_t seed,
              std::uint32_t fold);

  std::uint32_t user_count() const override;
  std::int64_t pair_tags(std::uint32_t sender, std::uint32_t recipient) const override;
  std::int64_t total(std::uint32_t recipient) const override;

 private:
  const DegreeStats* stats_;
  const RateAssignment* rates_;
  std::uint64_t seed_;
  std::uint32_t fold_;
};

// Messages partitioned into epochs with per-(epoch, user) genuine and tag
// counts, all drawn from the same per-message realization that
// simulate_per_message(run) produces.
struct EpochPartition {
  std::int64_t epoch_size = 0;
  std::size_t epoch_count = 0;
  std::uint32_t user_count = 0;
  std::vector<std::int64_t> epoch_messages;                    // M_e per epoch
  std::vector<std::pair<std::size_t, std::size_t>> boundaries;  // contiguous mode only
  std::vector<std::int64_t> genuine;  // epoch * U + user
  std::vector<std::int64_t> tags;

  std::int64_t genuine_at(std::size_t epoch, std::uint32_t user) const {
    return genuine[epoch * user_count + user];
  }
  std::int64_t tags_at(std::size_t epoch, std::uint32_t user) const {
    return tags[epoch * user_count + user];
  }
};

// Contiguous timestamp-ordered blocks by default; random_sample instead
// assigns messages to epochs by a seeded random permutation.
EpochPartition partition_epochs(const CommGraph& graph, const RateAssignment& rates,
                                const SimulationRun& run, std::int64_t epoch_size,
                                bool random_sample = false);

// CSV "sender,recipient,genuine,tags" over pairs with any genuine or fuzzy
// traffic (original user ids).
void write_tag_table_csv(const TagSource& table, const DegreeStats& stats, const CommGraph& graph,
                         std::ostream& out);

// CSV "epoch,user,genuine,tags" (original user ids).
void write_epoch_csv(const EpochPartition& epochs, const CommGraph& graph, std::ostream& out);

}  // namespace fmd

#endif  // FMD_SIMULATE_HPP_
