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

#include "fmd/dp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace fmd {

double peedp_epsilon(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("peedp_epsilon: p must be in [0, 1]");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p);
}

DpParams incoming_dp(std::int64_t total_messages, std::int64_t in_count, double p) {
  if (total_messages < 1) throw std::invalid_argument("incoming_dp: total_messages must be >= 1");
  if (in_count < 0 || in_count >= total_messages) {
    throw std::invalid_argument("incoming_dp: need 0 <= in_count < total_messages");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("incoming_dp: p must be strictly inside (0, 1)");
  }
  double m = static_cast<double>(total_messages);
  double in = static_cast<double>(in_count);
  double term1 = p * (m - 2.0 * in) / ((1.0 - p) * (in + 1.0));
  double term2 = (1.0 - p) * (m - in) / p;
  double ratio = std::fmax(std::fmax(term1, term2), 1.0);
  DpParams out;
  out.epsilon = std::log(ratio);
  out.log10_delta = (m - in) * std::log10(std::fmax(p, 1.0 - p));
  return out;
}

DpParams incoming_dp_group(std::int64_t total_messages,
                           const std::vector<std::int64_t>& in_counts,
                           const std::vector<double>& rates) {
  if (in_counts.empty() || in_counts.size() != rates.size()) {
    throw std::invalid_argument("incoming_dp_group: need matching non-empty in_counts and rates");
  }
  DpParams worst{-std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < in_counts.size(); ++i) {
    DpParams one = incoming_dp(total_messages, in_counts[i], rates[i]);
    worst.epsilon = std::fmax(worst.epsilon, one.epsilon);
    worst.log10_delta = std::fmax(worst.log10_delta, one.log10_delta);
  }
  return worst;
}

std::string delta_decimal_string(double log10_delta) {
  if (std::isinf(log10_delta) && log10_delta < 0.0) return "0";
  if (log10_delta > 0.0) throw std::invalid_argument("delta_decimal_string: log10_delta must be <= 0");
  double exponent = std::floor(log10_delta);
  double mantissa = std::pow(10.0, log10_delta - exponent);
  // %.1f rounds 9.95+ up to "10.0"; carry into the exponent instead.
  if (mantissa >= 9.95) {
    mantissa = 1.0;
    exponent += 1.0;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1fe%.0f", mantissa, exponent);
  return buf;
}

}  // namespace fmd
