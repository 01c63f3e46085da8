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

#include "fmd/attacks.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "fmd/statmath.hpp"

namespace fmd {
namespace {

constexpr std::int64_t kNormalCutoff = 100;  // z quantile at or above, t below
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_level(SignificanceLevel level) {
  if (!(level.alpha > 0.0 && level.alpha < 1.0)) {
    throw std::invalid_argument("significance level must be in (0, 1)");
  }
}

// Quantile for a count-n test: normal at n >= 100, t with dof = n-1 below.
// NaN when n == 1 (no degrees of freedom).
double count_test_quantile(std::int64_t n, SignificanceLevel level) {
  if (n >= kNormalCutoff) return test_quantile_normal(level, Tails::two);
  if (n >= 2) return test_quantile_t(level, n - 1, Tails::two);
  return kNaN;
}

// Caches the per-(n) quantile within one scan.
class QuantileCache {
 public:
  explicit QuantileCache(SignificanceLevel level) : level_(level) {}

  double get(std::int64_t n) {
    if (n >= kNormalCutoff) {
      if (!has_normal_) {
        normal_ = test_quantile_normal(level_, Tails::two);
        has_normal_ = true;
      }
      return normal_;
    }
    auto it = by_count_.find(n);
    if (it != by_count_.end()) return it->second;
    double q = count_test_quantile(n, level_);
    by_count_.emplace(n, q);
    return q;
  }

 private:
  SignificanceLevel level_;
  bool has_normal_ = false;
  double normal_ = 0.0;
  std::unordered_map<std::int64_t, double> by_count_;
};

// Shared core for both count tests: observed vs Binomial(n, p) null with a
// precomputed quantile.
PairTestResult count_test_core(double observed, std::int64_t n, DetectionRate p,
                               double quantile) {
  PairTestResult r;
  r.observed = observed;
  double pv = p.value();

  if (pv <= 0.0) {
    // Exact rule: fuzz is impossible, any download is genuine.
    r.mean = 0.0;
    r.std = 0.0;
    r.statistic = observed > 0.0 ? kInf : 0.0;
    r.quantile = 0.0;
    r.guard_ok = true;
    r.raw_exceeds = observed > 0.0;
    r.verdict = r.raw_exceeds ? Verdict::flagged : Verdict::not_flagged;
    return r;
  }
  if (pv >= 1.0) {
    // Exact rule: everything is downloaded, zero variance, perfect cover.
    r.mean = static_cast<double>(n);
    r.std = 0.0;
    r.statistic = 0.0;
    r.quantile = 0.0;
    r.guard_ok = true;
    r.raw_exceeds = false;
    r.verdict = Verdict::not_flagged;
    return r;
  }

  r.mean = static_cast<double>(n) * pv;
  r.std = std::sqrt(static_cast<double>(n) * pv * (1.0 - pv));
  r.statistic = (observed - r.mean) / r.std;
  r.quantile = quantile;
  r.guard_ok = approx_guard(n, p);
  // Strict inequality: ties are not flagged. NaN quantile (n == 1) compares
  // false, so raw_exceeds stays off.
  r.raw_exceeds = std::fabs(r.statistic) > r.quantile;
  if (!r.guard_ok || std::isnan(r.quantile)) {
    r.verdict = Verdict::inapplicable;
  } else {
    r.verdict = r.raw_exceeds ? Verdict::flagged : Verdict::not_flagged;
  }
  return r;
}

}  // namespace

double test_quantile_normal(SignificanceLevel level, Tails tails) {
  check_level(level);
  double prob = tails == Tails::two ? 1.0 - level.alpha / 2.0 : 1.0 - level.alpha;
  return normal_quantile(prob);
}

double test_quantile_t(SignificanceLevel level, std::int64_t dof, Tails tails) {
  check_level(level);
  if (dof < 1) throw std::invalid_argument("test_quantile_t: dof must be >= 1");
  double prob = tails == Tails::two ? 1.0 - level.alpha / 2.0 : 1.0 - level.alpha;
  return student_t_quantile(prob, static_cast<double>(dof));
}

bool approx_guard(std::int64_t n, DetectionRate p) {
  double np = static_cast<double>(n) * p.value();
  double nq = static_cast<double>(n) * (1.0 - p.value());
  return np >= 5.0 && nq >= 5.0;
}

PairTestResult rel_anon_test(double observed, std::int64_t out, DetectionRate p,
                             SignificanceLevel level) {
  check_level(level);
  if (out < 1) throw std::invalid_argument("rel_anon_test: out must be >= 1");
  return count_test_core(observed, out, p, count_test_quantile(out, level));
}

PairTestResult tda_test(double observed_tags, std::int64_t epoch_messages, DetectionRate p,
                        SignificanceLevel level) {
  check_level(level);
  if (epoch_messages < 1) throw std::invalid_argument("tda_test: epoch_messages must be >= 1");
  return count_test_core(observed_tags, epoch_messages, p,
                         count_test_quantile(epoch_messages, level));
}

std::optional<std::int64_t> min_exposing_messages(std::int64_t out, DetectionRate p,
                                                  SignificanceLevel level) {
  check_level(level);
  if (out < 1) throw std::invalid_argument("min_exposing_messages: out must be >= 1");
  double pv = p.value();
  if (pv >= 1.0) return std::nullopt;  // total cover, nothing is ever flagged
  if (pv <= 0.0) return 1;             // one genuine message already shows
  double q = count_test_quantile(out, level);
  if (std::isnan(q)) return std::nullopt;  // out == 1: no usable test

  // Expected observation at in genuine messages is in + p(out - in), so the
  // statistic reduces to in(1-p)/sqrt(out p (1-p)). Raw threshold rule (the
  // guard is about test validity on data, not about this design curve).
  double scale = (1.0 - pv) / std::sqrt(static_cast<double>(out) * pv * (1.0 - pv));
  for (std::int64_t in = 1; in <= out; ++in) {
    if (static_cast<double>(in) * scale > q) return in;
  }
  return std::nullopt;
}

double min_rate_for_tda(std::int64_t epoch_messages, std::int64_t in_epoch,
                        SignificanceLevel level) {
  check_level(level);
  if (epoch_messages < 1) throw std::invalid_argument("min_rate_for_tda: epoch_messages >= 1");
  if (in_epoch < 0 || in_epoch > epoch_messages) {
    throw std::invalid_argument("min_rate_for_tda: need 0 <= in_epoch <= epoch_messages");
  }
  if (in_epoch == 0) return 0.0;
  double q = count_test_quantile(epoch_messages, level);
  double in = static_cast<double>(in_epoch);
  // Boundary of in(1-p) <= q sqrt(p(1-p) M_e).
  return in * in / (q * q * static_cast<double>(epoch_messages) + in * in);
}

double min_rate_for_tda_scan(std::int64_t epoch_messages, std::int64_t in_epoch,
                             SignificanceLevel level, double resolution) {
  check_level(level);
  if (!(resolution > 0.0 && resolution < 1.0)) {
    throw std::invalid_argument("min_rate_for_tda_scan: resolution must be in (0, 1)");
  }
  if (in_epoch == 0) return 0.0;
  double q = count_test_quantile(epoch_messages, level);
  double in = static_cast<double>(in_epoch);
  double me = static_cast<double>(epoch_messages);
  for (double p = resolution; p < 1.0; p += resolution) {
    double statistic = in * (1.0 - p) / std::sqrt(p * (1.0 - p) * me);
    if (statistic <= q) return p;
  }
  return 1.0;
}

void ConfusionStats::add(bool predicted, bool truth) {
  if (predicted && truth) {
    ++true_positive;
  } else if (predicted) {
    ++false_positive;
  } else if (truth) {
    ++false_negative;
  } else {
    ++true_negative;
  }
}

void ConfusionStats::merge(const ConfusionStats& other) {
  true_positive += other.true_positive;
  false_positive += other.false_positive;
  false_negative += other.false_negative;
  true_negative += other.true_negative;
}

double ConfusionStats::precision() const {
  std::int64_t denom = true_positive + false_positive;
  return denom > 0 ? static_cast<double>(true_positive) / static_cast<double>(denom) : 0.0;
}

double ConfusionStats::recall() const {
  std::int64_t denom = true_positive + false_negative;
  return denom > 0 ? static_cast<double>(true_positive) / static_cast<double>(denom) : 0.0;
}

RelationshipScanResult relationship_scan(const TagSource& table, const DegreeStats& stats,
                                         const RateAssignment& rates, SignificanceLevel level,
                                         bool unordered, const RelRowSink& sink) {
  check_level(level);
  const std::uint32_t n = table.user_count();
  if (stats.user_count() != n || rates.rates.size() != n) {
    throw std::invalid_argument("relationship_scan: table, stats, and rates disagree on users");
  }
  QuantileCache quantiles(level);
  RelationshipScanResult result;

  auto run_direction = [&](std::uint32_t v, std::uint32_t u) -> std::pair<bool, bool> {
    // Returns (tested, predicted).
    std::int64_t out = stats.out_degree[v];
    if (out < 1) return {false, false};
    double observed = static_cast<double>(table.pair_tags(v, u));
    PairTestResult r = count_test_core(observed, out, rates.rate(u), quantiles.get(out));
    r.sender = v;
    r.recipient = u;
    bool truth = stats.pair_count(v, u) >= 1;
    ++result.meta.tested;
    if (!r.guard_ok) ++result.meta.guard_violations;
    if (r.verdict == Verdict::inapplicable) ++result.meta.inapplicable;
    bool predicted = r.verdict == Verdict::flagged;
    if (predicted) result.flagged.push_back(r);
    if (sink) sink(r, truth);
    return {true, predicted};
  };

  if (!unordered) {
    for (std::uint32_t v = 0; v < n; ++v) {
      if (stats.out_degree[v] < 1) continue;
      for (std::uint32_t u = 0; u < n; ++u) {
        if (u == v) continue;
        auto [tested, predicted] = run_direction(v, u);
        if (tested) result.confusion.add(predicted, stats.pair_count(v, u) >= 1);
      }
    }
  } else {
    for (std::uint32_t v = 0; v < n; ++v) {
      for (std::uint32_t u = v + 1; u < n; ++u) {
        auto [t1, p1] = run_direction(v, u);
        auto [t2, p2] = run_direction(u, v);
        if (!t1 && !t2) continue;
        bool truth = stats.pair_count(v, u) >= 1 || stats.pair_count(u, v) >= 1;
        result.confusion.add(p1 || p2, truth);
      }
    }
  }
  return result;
}

TdaScanResult tda_scan(const EpochPartition& epochs, const RateAssignment& rates,
                       SignificanceLevel level) {
  check_level(level);
  if (rates.rates.size() != epochs.user_count) {
    throw std::invalid_argument("tda_scan: rates must cover all users");
  }
  QuantileCache quantiles(level);
  TdaScanResult result;
  result.rows.reserve(epochs.epoch_count * epochs.user_count);
  for (std::size_t e = 0; e < epochs.epoch_count; ++e) {
    std::int64_t me = epochs.epoch_messages[e];
    if (me < 1) continue;
    double quantile = quantiles.get(me);
    for (std::uint32_t u = 0; u < epochs.user_count; ++u) {
      TdaRow row;
      row.epoch = e;
      row.user = u;
      row.test = count_test_core(static_cast<double>(epochs.tags_at(e, u)), me, rates.rate(u),
                                 quantile);
      row.truth = epochs.genuine_at(e, u) >= 1;
      // Only an excess of downloads can indicate received messages.
      bool predicted = row.test.verdict == Verdict::flagged && row.test.statistic > 0.0;
      ++result.meta.tested;
      if (!row.test.guard_ok) ++result.meta.guard_violations;
      if (row.test.verdict == Verdict::inapplicable) ++result.meta.inapplicable;
      result.confusion.add(predicted, row.truth);
      result.rows.push_back(row);
    }
  }
  return result;
}

void write_relationship_header(std::ostream& out) {
  out << "sender,recipient,observed,mean,std,statistic,quantile,flagged,truth\n";
}

void write_relationship_row(std::ostream& out, std::int64_t sender_id, std::int64_t recipient_id,
                            const PairTestResult& result, bool truth) {
  out << sender_id << ',' << recipient_id << ',' << result.observed << ',' << result.mean << ','
      << result.std << ',' << result.statistic << ',' << result.quantile << ','
      << (result.verdict == Verdict::flagged ? 1 : 0) << ',' << (truth ? 1 : 0) << '\n';
}

void write_tda_csv(const TdaScanResult& result, const CommGraph& graph, std::ostream& out) {
  out << "epoch,user,observed,expected,statistic,flagged,truth\n";
  for (const TdaRow& row : result.rows) {
    bool predicted = row.test.verdict == Verdict::flagged && row.test.statistic > 0.0;
    out << row.epoch << ',' << graph.original_ids[row.user] << ',' << row.test.observed << ','
        << row.test.mean << ',' << row.test.statistic << ',' << (predicted ? 1 : 0) << ','
        << (row.truth ? 1 : 0) << '\n';
  }
}

}  // namespace fmd
