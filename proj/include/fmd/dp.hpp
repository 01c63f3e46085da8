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

#ifndef FMD_DP_HPP_
#define FMD_DP_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace fmd {

// delta is carried as a base-10 exponent: the magnitudes involved (down to
// 10^-28027) underflow every machine float.
struct DpParams {
  double epsilon = 0.0;      // natural-log scale
  double log10_delta = 0.0;  // <= 0
};

// ln(1/p) for the event-level guarantee of a rate-p detector. p = 0 returns
// +infinity: with no cover traffic there is nothing to bound.
double peedp_epsilon(double p);

// (epsilon, delta) for the count of incoming messages under a rate-p detector
// observing M total messages:
//   epsilon     = ln(max(p(M - 2 in)/((1-p)(in+1)), (1-p)(M - in)/p))
//   log10 delta = (M - in) * log10(max(p, 1-p))
// A negative first term is dominated by the always-positive second; the whole
// max is clamped at 1 so epsilon stays >= 0 (a smaller epsilon would only
// strengthen the guarantee the pair states).
DpParams incoming_dp(std::int64_t total_messages, std::int64_t in_count, double p);

// Worst user in a population: element-wise incoming_dp, epsilon and
// log10_delta each maximized across users.
DpParams incoming_dp_group(std::int64_t total_messages,
                           const std::vector<std::int64_t>& in_counts,
                           const std::vector<double>& rates);

// "3.0e-3"-style decimal rendering of a log10 delta value.
std::string delta_decimal_string(double log10_delta);

}  // namespace fmd

#endif  // FMD_DP_HPP_
