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

#ifndef FMD_RNG_HPP_
#define FMD_RNG_HPP_

#include <array>
#include <cstdint>
#include <limits>

namespace fmd {

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

// Philox4x32-10 block function (counter-based, stateless).
// Verified against the published known-answer vectors in tests.
std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key);

// Derives the 64-bit Philox key for one experiment fold. Distinct folds of the
// same seed always get distinct keys (the fold enters through an odd-multiplier
// injection before the finalizer).
std::uint64_t fold_key(std::uint64_t seed, std::uint32_t fold);

// Purpose tag baked into the counter so streams for different uses of the same
// (seed, fold, entity) never collide. Values are part of the reproducible
// layout; do not renumber.
enum class StreamDomain : std::uint32_t {
  rate_assign = 1,
  per_message = 2,
  aggregated_pair = 3,
  epoch_pair = 4,
  monte_carlo = 5,
  synth_graph = 6,
  game_random = 7,
};

// One independent random stream addressed by (key, domain, entity).
// Counter layout: word0 = block index, word1/word2 = entity, word3 = domain.
// Satisfies UniformRandomBitGenerator (64-bit output), so it plugs directly
// into <random> distributions.
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  KeyedStream(std::uint64_t key, StreamDomain domain, std::uint64_t entity);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double next_double();

  // One draw is always consumed, including at p <= 0 and p >= 1, so outcome
  // sequences stay aligned across rate sweeps. Exact for dyadic p.
  bool bernoulli(double p);

  // Unbiased integer in [0, n); n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t entity_lo_;
  std::uint32_t entity_hi_;
  std::uint32_t domain_;
  std::uint32_t block_;
  std::array<std::uint32_t, 4> buf_;
  int avail_;  // unconsumed 64-bit lanes in buf_ (0..2)

  void refill();
};

// Convenience: stream for (seed, fold) at a given domain/entity.
KeyedStream make_stream(std::uint64_t seed, std::uint32_t fold, StreamDomain domain,
                        std::uint64_t entity);

// Entity id for an ordered user pair.
inline std::uint64_t pair_entity(std::uint32_t v, std::uint32_t u) {
  return (static_cast<std::uint64_t>(v) << 32) | u;
}

// Exact binomial draw; wraps the standard-library sampler over a KeyedStream.
std::int64_t binomial_draw(KeyedStream& stream, std::int64_t n, double p);

}  // namespace fmd

#endif  // FMD_RNG_HPP_
