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

#ifndef FMD_ANONYMITY_HPP_
#define FMD_ANONYMITY_HPP_

#include <cstdint>
#include <optional>
#include <vector>

namespace fmd {

enum class RuKind { exact, approx_lower_bound, monte_carlo };

struct RuEstimate {
  double value = 0.0;  // in [0, 1]
  RuKind kind = RuKind::exact;
  std::optional<std::int64_t> trials;
  std::optional<double> std_error;
};

// Closed-form lower bound exp(-(3*floor(pU)^2 + floor(pU)) / (2U)) on the
// adversary's conditional success when the two challenge messages go to
// different recipients.
RuEstimate ru_advantage_approx(std::int64_t user_count, double p);

// Exact disjointness probability of the two fuzzy sets, by explicit sum over
// all subsets containing the first message's recipient (rates[0]) and not the
// second's (rates[1]). Capped at 22 users; larger populations should use
// ru_game_montecarlo.
RuEstimate ru_advantage_exact(const std::vector<double>& rates);

struct RuGameResult {
  RuEstimate overall;         // empirical Pr[adversary wins]
  RuEstimate conditional_b1;  // empirical Pr[win | different recipients]
  std::int64_t trials_b1 = 0;
};

// Simulates the distinguishing game: the adversary sees both download sets and
// answers "same recipient" iff they intersect. Wins with certainty when the
// recipients coincide, so only the disjointness side carries uncertainty.
RuGameResult ru_game_montecarlo(const std::vector<double>& rates, std::int64_t trials,
                                std::uint64_t seed, std::uint32_t fold = 0);

struct IntersectionResult {
  double expected_residual = 0.0;  // U * p^l
  std::int64_t set_size_n = 0;     // Binomial n parameter (U)
  double member_prob = 0.0;        // Binomial success parameter (p^l)
};

// Expected anonymity-set size after intersecting l fuzzy sets addressed to the
// same user, with the residual-size distribution parameters.
IntersectionResult intersection_attack(std::int64_t user_count, double p, std::int64_t rounds);

// Probability that K colluding users pinpoint a message's recipient when the
// anonymity set leaves N non-colluding candidates besides the recipient:
// C(N+1, K) / C(U, K), in log space; 0 when K > N+1.
double sybil_pinpoint_prob(std::int64_t user_count, std::int64_t colluders,
                           std::int64_t candidates);

}  // namespace fmd

#endif  // FMD_ANONYMITY_HPP_
