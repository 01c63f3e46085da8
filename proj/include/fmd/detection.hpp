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

#ifndef FMD_DETECTION_HPP_
#define FMD_DETECTION_HPP_

#include <cstdint>
#include <optional>

#include "fmd/rng.hpp"

namespace fmd {

// A per-user false-positive rate. Dyadic rates 2^-l carry their exponent so
// experiment configs and reports can round-trip them exactly.
class DetectionRate {
 public:
  static DetectionRate dyadic(unsigned exponent);  // value 2^-l, l <= 64
  static DetectionRate from_value(double p);       // any p in [0, 1]

  double value() const { return value_; }
  std::optional<unsigned> dyadic_exponent() const { return dyadic_exponent_; }

 private:
  DetectionRate(double value, std::optional<unsigned> exponent)
      : value_(value), dyadic_exponent_(exponent) {}

  double value_;
  std::optional<unsigned> dyadic_exponent_;
};

inline DetectionRate dyadic_rate(unsigned exponent) { return DetectionRate::dyadic(exponent); }

struct MessageEvent {
  std::uint32_t sender;
  std::uint32_t recipient;
  std::int64_t timestamp;
};

// The detection key held by the server on behalf of one user: a true match is
// always reported; everything else matches with probability rate.
struct IdealDetector {
  std::uint32_t owner;
  DetectionRate rate;
};

// One draw is consumed from rng for every non-matching test, regardless of
// rate, so outcome streams stay aligned across rate sweeps.
bool ideal_test(const IdealDetector& detector, const MessageEvent& message, KeyedStream& rng);

// in_count + rate * (total_messages - in_count).
double expected_tags(std::int64_t in_count, std::int64_t total_messages, DetectionRate rate);

}  // namespace fmd

#endif  // FMD_DETECTION_HPP_
