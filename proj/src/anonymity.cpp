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

#include "fmd/anonymity.hpp"

#include <cmath>
#include <stdexcept>

#include "fmd/rng.hpp"

namespace fmd {
namespace {

constexpr std::int64_t kExactCap = 22;

void check_rates(const std::vector<double>& rates) {
  for (double p : rates) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("rates must lie in [0, 1]");
    }
  }
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

RuEstimate ru_advantage_approx(std::int64_t user_count, double p) {
  if (user_count < 1) throw std::invalid_argument("ru_advantage_approx: user_count must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ru_advantage_approx: p must be in [0, 1]");
  double k = std::floor(p * static_cast<double>(user_count));
  double exponent = (3.0 * k * k + k) / (2.0 * static_cast<double>(user_count));
  return {std::exp(-exponent), RuKind::approx_lower_bound, std::nullopt, std::nullopt};
}

RuEstimate ru_advantage_exact(const std::vector<double>& rates) {
  const std::size_t u_count = rates.size();
  if (u_count < 2) throw std::invalid_argument("ru_advantage_exact: need at least 2 users");
  if (u_count > kExactCap) {
    throw std::length_error(
        "ru_advantage_exact: subset sum is 2^U; capped at 22 users, use ru_game_montecarlo");
  }
  check_rates(rates);

  // Sum over download sets V of the first message: recipient 0 is always in V,
  // the second recipient (user 1) must not be, and the second message's set
  // must miss every member of V.
  double total = 0.0;
  const std::uint32_t n = static_cast<std::uint32_t>(u_count);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if ((mask & 1u) == 0) continue;  // user 0 in V
    if (mask & 2u) continue;         // user 1 not in V
    double term = 1.0;
    for (std::uint32_t l = 0; l < n; ++l) {
      bool member = (mask >> l) & 1u;
      if (member) {
        if (l != 0) term *= rates[l];   // joined the first set by fuzz
        term *= 1.0 - rates[l];         // must miss the second set
      } else {
        term *= 1.0 - rates[l];         // stayed out of the first set
      }
    }
    total += term;
  }
  return {total, RuKind::exact, std::nullopt, std::nullopt};
}

RuGameResult ru_game_montecarlo(const std::vector<double>& rates, std::int64_t trials,
                                std::uint64_t seed, std::uint32_t fold) {
  const std::size_t u_count = rates.size();
  if (u_count < 2) throw std::invalid_argument("ru_game_montecarlo: need at least 2 users");
  if (trials < 1) throw std::invalid_argument("ru_game_montecarlo: trials must be >= 1");
  check_rates(rates);

  std::int64_t wins = 0;
  std::int64_t b1_trials = 0;
  std::int64_t b1_wins = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    KeyedStream stream =
        make_stream(seed, fold, StreamDomain::monte_carlo, static_cast<std::uint64_t>(t));
    bool c = stream.bernoulli(0.5);
    bool b = stream.bernoulli(0.5);
    std::uint32_t rec_a = c ? 1 : 0;
    std::uint32_t rec_b = b ? (c ? 0 : 1) : rec_a;

    bool intersect = false;
    for (std::uint32_t l = 0; l < u_count; ++l) {
      bool in_a = (l == rec_a) || stream.bernoulli(rates[l]);
      bool in_b = (l == rec_b) || stream.bernoulli(rates[l]);
      if (in_a && in_b) intersect = true;  // keep drawing: fixed draw count per trial
    }
    bool guess_different = !intersect;
    bool win = guess_different == b;
    wins += win;
    if (b) {
      ++b1_trials;
      b1_wins += win;
    }
  }

  auto proportion = [](std::int64_t k, std::int64_t n) -> RuEstimate {
    double v = n > 0 ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
    double se = n > 0 ? std::sqrt(v * (1.0 - v) / static_cast<double>(n)) : 0.0;
    return {v, RuKind::monte_carlo, n, se};
  };
  RuGameResult result;
  result.overall = proportion(wins, trials);
  result.conditional_b1 = proportion(b1_wins, b1_trials);
  result.trials_b1 = b1_trials;
  return result;
}

IntersectionResult intersection_attack(std::int64_t user_count, double p, std::int64_t rounds) {
  if (user_count < 1) throw std::invalid_argument("intersection_attack: user_count must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("intersection_attack: p must be in [0, 1]");
  if (rounds < 1) throw std::invalid_argument("intersection_attack: rounds must be >= 1");
  double member_prob = std::pow(p, static_cast<double>(rounds));
  return {static_cast<double>(user_count) * member_prob, user_count, member_prob};
}

double sybil_pinpoint_prob(std::int64_t user_count, std::int64_t colluders,
                           std::int64_t candidates) {
  if (candidates < 0 || candidates >= user_count) {
    throw std::invalid_argument("sybil_pinpoint_prob: need 0 <= candidates < user_count");
  }
  if (colluders < 1 || colluders > user_count) {
    throw std::invalid_argument("sybil_pinpoint_prob: need 1 <= colluders <= user_count");
  }
  if (colluders > candidates + 1) return 0.0;
  return std::exp(log_choose(candidates + 1, colluders) - log_choose(user_count, colluders));
}

}  // namespace fmd
