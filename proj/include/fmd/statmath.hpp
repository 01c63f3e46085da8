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

#ifndef FMD_STATMATH_HPP_
#define FMD_STATMATH_HPP_

#include <cstdint>

namespace fmd {

// Standard normal CDF, accurate in both tails (erfc based).
double normal_cdf(double x);

// Inverse standard normal CDF for prob in (0, 1).
double normal_quantile(double prob);

// q such that P(|Z| > q) = alpha for a standard normal Z.
double two_sided_normal_quantile(double alpha);

// Regularized incomplete beta function I_x(a, b), x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

// Student t distribution with dof degrees of freedom.
double student_t_cdf(double x, double dof);
double student_t_quantile(double prob, double dof);

// q such that P(|T_dof| > q) = alpha.
double two_sided_t_quantile(double alpha, double dof);

// log P(X = k) for X ~ Binomial(n, p). Returns -inf for zero-mass points.
double binomial_log_pmf(std::int64_t k, std::int64_t n, double p);

// P(X >= k) for X ~ Binomial(n, p).
double binomial_tail_ge(std::int64_t k, std::int64_t n, double p);

}  // namespace fmd

#endif  // FMD_STATMATH_HPP_
