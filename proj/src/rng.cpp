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

#include "fmd/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fmd {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t* hi, std::uint32_t* lo) {
  std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  *hi = static_cast<std::uint32_t>(prod >> 32);
  *lo = static_cast<std::uint32_t>(prod);
}

inline std::array<std::uint32_t, 4> philox_round(const std::array<std::uint32_t, 4>& ctr,
                                                 const std::array<std::uint32_t, 2>& key) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo32(kPhiloxM0, ctr[0], &hi0, &lo0);
  mulhilo32(kPhiloxM1, ctr[2], &hi1, &lo1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> ctr = counter;
  std::array<std::uint32_t, 2> k = key;
  ctr = philox_round(ctr, k);
  for (int round = 1; round < 10; ++round) {
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
    ctr = philox_round(ctr, k);
  }
  return ctr;
}

std::uint64_t fold_key(std::uint64_t seed, std::uint32_t fold) {
  // Odd multiplier keeps fold injection bijective, so (seed, fold) pairs with
  // the same seed can never alias before the finalizer.
  return splitmix64(seed ^ (static_cast<std::uint64_t>(fold) * 0x9E3779B97F4A7C15ull));
}

KeyedStream::KeyedStream(std::uint64_t key, StreamDomain domain, std::uint64_t entity)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      entity_lo_(static_cast<std::uint32_t>(entity)),
      entity_hi_(static_cast<std::uint32_t>(entity >> 32)),
      domain_(static_cast<std::uint32_t>(domain)),
      block_(0),
      buf_{},
      avail_(0) {}

void KeyedStream::refill() {
  buf_ = philox4x32_10({block_, entity_lo_, entity_hi_, domain_}, key_);
  ++block_;
  avail_ = 2;
}

KeyedStream::result_type KeyedStream::operator()() {
  if (avail_ == 0) refill();
  --avail_;
  int base = 2 * avail_;
  return (static_cast<std::uint64_t>(buf_[base + 1]) << 32) | buf_[base];
}

double KeyedStream::next_double() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

bool KeyedStream::bernoulli(double p) {
  std::uint64_t draw = (*this)();
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  // ldexp(p, 64) is exact for p = 2^-l with l <= 64, so dyadic rates see an
  // exact threshold.
  long double threshold = std::ldexp(static_cast<long double>(p), 64);
  return static_cast<long double>(draw) < threshold;
}

std::uint64_t KeyedStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be >= 1");
  // Lemire's multiply-shift with rejection of the biased low slice.
  std::uint64_t x = (*this)();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < n) {
    std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<unsigned __int128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

KeyedStream make_stream(std::uint64_t seed, std::uint32_t fold, StreamDomain domain,
                        std::uint64_t entity) {
  return KeyedStream(fold_key(seed, fold), domain, entity);
}

std::int64_t binomial_draw(KeyedStream& stream, std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_draw: n must be >= 0");
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(stream);
}

}  // namespace fmd
