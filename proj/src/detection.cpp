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

#include "fmd/detection.hpp"

#include <cmath>
#include <stdexcept>

namespace fmd {

DetectionRate DetectionRate::dyadic(unsigned exponent) {
  if (exponent > 64) {
    throw std::range_error("DetectionRate::dyadic: exponent must be <= 64");
  }
  return DetectionRate(std::ldexp(1.0, -static_cast<int>(exponent)), exponent);
}

DetectionRate DetectionRate::from_value(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("DetectionRate::from_value: p must be in [0, 1]");
  }
  // Recover the exponent of an exact power of two so values parsed from
  // configs or CSVs keep the exactness guarantees of dyadic().
  if (p > 0.0) {
    int exp2 = 0;
    double mantissa = std::frexp(p, &exp2);  // p = mantissa * 2^exp2
    if (mantissa == 0.5 && exp2 <= 1 && exp2 >= -63) {
      return DetectionRate(p, static_cast<unsigned>(1 - exp2));
    }
  }
  return DetectionRate(p, std::nullopt);
}

bool ideal_test(const IdealDetector& detector, const MessageEvent& message, KeyedStream& rng) {
  if (message.recipient == detector.owner) return true;
  return rng.bernoulli(detector.rate.value());
}

double expected_tags(std::int64_t in_count, std::int64_t total_messages, DetectionRate rate) {
  if (in_count < 0 || total_messages < 0 || in_count > total_messages) {
    throw std::invalid_argument("expected_tags: need 0 <= in_count <= total_messages");
  }
  return static_cast<double>(in_count) +
         rate.value() * static_cast<double>(total_messages - in_count);
}

}  // namespace fmd
