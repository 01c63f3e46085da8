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

#ifndef FMD_GAME_HPP_
#define FMD_GAME_HPP_

#include <cstdint>
#include <vector>

namespace fmd {

// The rate-selection game: each user picks a false-positive rate; fuzz bought
// by others is what hides a user's own incoming traffic.
struct GameConfig {
  std::int64_t user_count = 0;
  double download_cost_f = 1.0;  // per retrieved message
  double privacy_loss_L = 0.0;   // flat loss when an incoming message is exposed
  std::vector<std::int64_t> in_counts;
  std::int64_t total_messages = 0;
};

void validate_config(const GameConfig& config);

// One rate per user, each in [0, 1].
using StrategyProfile = std::vector<double>;

struct UtilityBreakdown {
  double privacy_term = 0.0;    // -L(1 - (1 - alpha_u)^{in(u)})
  double bandwidth_term = 0.0;  // -f(in(u) + p(u)(M - in(u)))
  double total = 0.0;
};

// Probability that none of the other users fuzz-download a given message:
// product of (1 - p(v)) over v != u.
double linkage_alpha(std::size_t u, const StrategyProfile& profile);

UtilityBreakdown utility(std::size_t u, const StrategyProfile& profile, const GameConfig& config);

// Symmetric-profile utility when every user plays the same p.
double uniform_utility(double p, std::size_t u, const GameConfig& config);

// Argmax of own utility over the grid {k/(grid-1)}, others held fixed; ties
// break toward the smaller rate. grid is the number of points, >= 2.
double best_response(std::size_t u, const StrategyProfile& profile, const GameConfig& config,
                     std::int64_t grid);

struct BrResult {
  StrategyProfile final;
  std::int64_t rounds = 0;
  std::int64_t accepted_steps = 0;
  bool converged = false;
  std::vector<double> potential_trace;  // initial value, then after each accepted step
};

// Round-robin best responses (fixed user order) until a full round changes
// nothing or max_iters rounds elapse.
BrResult br_dynamics(const StrategyProfile& initial, const GameConfig& config,
                     std::int64_t max_iters, std::int64_t grid = 1001);

// True iff no player can improve by more than tolerance via any grid deviation.
bool is_nash(const StrategyProfile& profile, const GameConfig& config, std::int64_t grid,
             double tolerance);

// -f * sum_u p(u) (M - in(u)). Unilateral utility changes equal potential
// changes exactly.
double potential(const StrategyProfile& profile, const GameConfig& config);

// True iff f(M - in(u)) < L for every user: the per-user condition under which
// full cover beats no cover for everyone.
bool so_condition(const GameConfig& config);

struct OptimalUniform {
  double p_star = 0.0;
  double welfare = 0.0;  // sum of utilities at p_star
};

// Argmax of total welfare over uniform profiles on the grid; ties toward
// smaller p.
OptimalUniform optimal_uniform_p(const GameConfig& config, std::int64_t grid);

}  // namespace fmd

#endif  // FMD_GAME_HPP_
