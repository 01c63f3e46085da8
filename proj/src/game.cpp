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

#include "fmd/game.hpp"

#include <cmath>
#include <stdexcept>

namespace fmd {
namespace {

void check_profile(const StrategyProfile& profile, const GameConfig& config) {
  if (static_cast<std::int64_t>(profile.size()) != config.user_count) {
    throw std::invalid_argument("profile length must equal user_count");
  }
  for (double p : profile) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("rates must lie in [0, 1]");
  }
}

void check_grid(std::int64_t grid) {
  if (grid < 2) throw std::invalid_argument("grid must have at least 2 points");
}

double grid_point(std::int64_t k, std::int64_t grid) {
  return static_cast<double>(k) / static_cast<double>(grid - 1);
}

// Utility of user u when own rate is p_own, with alpha (others' product)
// precomputed. Own rate never enters the privacy term.
UtilityBreakdown utility_at(double p_own, double alpha, std::int64_t in_count,
                            const GameConfig& config) {
  UtilityBreakdown b;
  double in = static_cast<double>(in_count);
  double m = static_cast<double>(config.total_messages);
  b.privacy_term =
      -config.privacy_loss_L * (1.0 - std::pow(1.0 - alpha, in));
  b.bandwidth_term = -config.download_cost_f * (in + p_own * (m - in));
  b.total = b.privacy_term + b.bandwidth_term;
  return b;
}

}  // namespace

void validate_config(const GameConfig& config) {
  if (config.user_count < 1) throw std::invalid_argument("user_count must be >= 1");
  if (!(config.download_cost_f > 0.0)) throw std::invalid_argument("download_cost_f must be > 0");
  if (!(config.privacy_loss_L > 0.0)) throw std::invalid_argument("privacy_loss_L must be > 0");
  if (static_cast<std::int64_t>(config.in_counts.size()) != config.user_count) {
    throw std::invalid_argument("in_counts length must equal user_count");
  }
  if (config.total_messages < 0) throw std::invalid_argument("total_messages must be >= 0");
  for (std::int64_t in : config.in_counts) {
    if (in < 0 || in > config.total_messages) {
      throw std::invalid_argument("each in(u) must satisfy 0 <= in(u) <= total_messages");
    }
  }
}

double linkage_alpha(std::size_t u, const StrategyProfile& profile) {
  if (u >= profile.size()) throw std::invalid_argument("linkage_alpha: index out of range");
  double alpha = 1.0;
  for (std::size_t v = 0; v < profile.size(); ++v) {
    if (v != u) alpha *= 1.0 - profile[v];
  }
  return alpha;
}

UtilityBreakdown utility(std::size_t u, const StrategyProfile& profile, const GameConfig& config) {
  validate_config(config);
  check_profile(profile, config);
  return utility_at(profile[u], linkage_alpha(u, profile), config.in_counts[u], config);
}

double uniform_utility(double p, std::size_t u, const GameConfig& config) {
  validate_config(config);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("uniform_utility: p must be in [0, 1]");
  if (u >= static_cast<std::size_t>(config.user_count)) {
    throw std::invalid_argument("uniform_utility: index out of range");
  }
  double alpha = std::pow(1.0 - p, static_cast<double>(config.user_count - 1));
  return utility_at(p, alpha, config.in_counts[u], config).total;
}

double best_response(std::size_t u, const StrategyProfile& profile, const GameConfig& config,
                     std::int64_t grid) {
  validate_config(config);
  check_profile(profile, config);
  check_grid(grid);
  double alpha = linkage_alpha(u, profile);
  double best_p = 0.0;
  double best_total = utility_at(0.0, alpha, config.in_counts[u], config).total;
  for (std::int64_t k = 1; k < grid; ++k) {
    double p = grid_point(k, grid);
    double total = utility_at(p, alpha, config.in_counts[u], config).total;
    if (total > best_total) {  // strict: ties keep the smaller rate
      best_total = total;
      best_p = p;
    }
  }
  return best_p;
}

BrResult br_dynamics(const StrategyProfile& initial, const GameConfig& config,
                     std::int64_t max_iters, std::int64_t grid) {
  validate_config(config);
  check_profile(initial, config);
  check_grid(grid);
  if (max_iters < 1) throw std::invalid_argument("br_dynamics: max_iters must be >= 1");

  BrResult result;
  result.final = initial;
  result.potential_trace.push_back(potential(initial, config));
  for (std::int64_t round = 0; round < max_iters; ++round) {
    bool changed = false;
    for (std::size_t u = 0; u < result.final.size(); ++u) {
      double br = best_response(u, result.final, config, grid);
      if (br != result.final[u]) {
        result.final[u] = br;
        ++result.accepted_steps;
        result.potential_trace.push_back(potential(result.final, config));
        changed = true;
      }
    }
    ++result.rounds;
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  return result;
}

bool is_nash(const StrategyProfile& profile, const GameConfig& config, std::int64_t grid,
             double tolerance) {
  validate_config(config);
  check_profile(profile, config);
  check_grid(grid);
  for (std::size_t u = 0; u < profile.size(); ++u) {
    double alpha = linkage_alpha(u, profile);
    double current = utility_at(profile[u], alpha, config.in_counts[u], config).total;
    for (std::int64_t k = 0; k < grid; ++k) {
      double total = utility_at(grid_point(k, grid), alpha, config.in_counts[u], config).total;
      if (total > current + tolerance) return false;
    }
  }
  return true;
}

double potential(const StrategyProfile& profile, const GameConfig& config) {
  validate_config(config);
  check_profile(profile, config);
  double sum = 0.0;
  for (std::size_t u = 0; u < profile.size(); ++u) {
    sum += profile[u] * static_cast<double>(config.total_messages - config.in_counts[u]);
  }
  return -config.download_cost_f * sum;
}

bool so_condition(const GameConfig& config) {
  validate_config(config);
  for (std::int64_t in : config.in_counts) {
    double slack = config.download_cost_f * static_cast<double>(config.total_messages - in);
    if (!(slack < config.privacy_loss_L)) return false;
  }
  return true;
}

OptimalUniform optimal_uniform_p(const GameConfig& config, std::int64_t grid) {
  validate_config(config);
  check_grid(grid);
  auto welfare = [&](double p) {
    double sum = 0.0;
    double alpha = std::pow(1.0 - p, static_cast<double>(config.user_count - 1));
    for (std::int64_t u = 0; u < config.user_count; ++u) {
      sum += utility_at(p, alpha, config.in_counts[u], config).total;
    }
    return sum;
  };
  OptimalUniform best{0.0, welfare(0.0)};
  for (std::int64_t k = 1; k < grid; ++k) {
    double p = grid_point(k, grid);
    double w = welfare(p);
    if (w > best.welfare) {
      best.p_star = p;
      best.welfare = w;
    }
  }
  return best;
}

}  // namespace fmd
