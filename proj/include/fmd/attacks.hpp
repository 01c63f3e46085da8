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

#ifndef FMD_ATTACKS_HPP_
#define FMD_ATTACKS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fmd/detection.hpp"
#include "fmd/graph.hpp"
#include "fmd/simulate.hpp"

namespace fmd {

struct SignificanceLevel {
  double alpha = 0.01;
};

enum class Tails { one, two };

// Test-side quantiles. The t variant converges to the normal one as dof grows.
double test_quantile_normal(SignificanceLevel level, Tails tails);
double test_quantile_t(SignificanceLevel level, std::int64_t dof, Tails tails);

enum class Verdict { flagged, not_flagged, inapplicable };

struct PairTestResult {
  std::uint32_t sender = 0;     // filled by scans
  std::uint32_t recipient = 0;  // filled by scans
  double observed = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double statistic = 0.0;
  double quantile = 0.0;
  Verdict verdict = Verdict::not_flagged;
  bool guard_ok = true;
  // |statistic| > quantile regardless of the guard; threshold inversions use
  // this raw rule, scans gate on verdict.
  bool raw_exceeds = false;
};

// Normal-approximation guard: n*p >= 5 and n*(1-p) >= 5.
bool approx_guard(std::int64_t n, DetectionRate p);

// Two-tailed test of observed download count against Binomial(out, p) null,
// normal quantile for out >= 100 and Student t with dof = out-1 below.
// Degenerate rates bypass the approximation: p=0 flags any observed > 0,
// p=1 never flags. A failed guard yields verdict inapplicable.
PairTestResult rel_anon_test(double observed, std::int64_t out, DetectionRate p,
                             SignificanceLevel level);

// Smallest in <= out whose expected download count in + p*(out - in) exceeds
// the test threshold; nullopt when no message count up to out does.
std::optional<std::int64_t> min_exposing_messages(std::int64_t out, DetectionRate p,
                                                  SignificanceLevel level);

// Per-epoch total-count test against Binomial(epoch_messages, p).
PairTestResult tda_test(double observed_tags, std::int64_t epoch_messages, DetectionRate p,
                        SignificanceLevel level);

// Smallest rate at which an expected observation in + p*(M_e - in) stays
// unflagged: in^2 / (q^2 * M_e + in^2).
double min_rate_for_tda(std::int64_t epoch_messages, std::int64_t in_epoch,
                        SignificanceLevel level);

// Grid-scan oracle for min_rate_for_tda: smallest grid multiple of resolution
// whose expected observation is not flagged.
double min_rate_for_tda_scan(std::int64_t epoch_messages, std::int64_t in_epoch,
                             SignificanceLevel level, double resolution);

struct ConfusionStats {
  std::int64_t true_positive = 0;
  std::int64_t false_positive = 0;
  std::int64_t false_negative = 0;
  std::int64_t true_negative = 0;

  void add(bool predicted, bool truth);
  void merge(const ConfusionStats& other);
  double precision() const;  // 0 when nothing was flagged
  double recall() const;     // 0 when there are no true pairs
};

struct ScanMetadata {
  std::int64_t tested = 0;
  std::int64_t guard_violations = 0;
  std::int64_t inapplicable = 0;
};

struct RelationshipScanResult {
  std::vector<PairTestResult> flagged;
  ConfusionStats confusion;
  ScanMetadata meta;
};

// Per-row callback: the full test result plus the ground truth for the pair.
using RelRowSink = std::function<void(const PairTestResult&, bool truth)>;

// Tests every ordered pair (v, u), v != u, out(v) >= 1, against the table.
// Ground truth: in_v(u) >= 1. Inapplicable verdicts count as not flagged.
// unordered merges (v, u) and (u, v) into one unit (either direction flagged,
// truth from either direction).
RelationshipScanResult relationship_scan(const TagSource& table, const DegreeStats& stats,
                                         const RateAssignment& rates, SignificanceLevel level,
                                         bool unordered = false,
                                         const RelRowSink& sink = nullptr);

struct TdaRow {
  std::size_t epoch = 0;
  std::uint32_t user = 0;
  PairTestResult test;
  bool truth = false;
};

struct TdaScanResult {
  std::vector<TdaRow> rows;
  ConfusionStats confusion;
  ScanMetadata meta;
};

// Per (epoch, user): predicted positive iff the test flags on the excess side
// (statistic > 0); ground truth iff the user received a genuine message in the
// epoch.
TdaScanResult tda_scan(const EpochPartition& epochs, const RateAssignment& rates,
                       SignificanceLevel level);

// CSV "sender,recipient,observed,mean,std,statistic,quantile,flagged,truth".
void write_relationship_header(std::ostream& out);
void write_relationship_row(std::ostream& out, std::int64_t sender_id, std::int64_t recipient_id,
                            const PairTestResult& result, bool truth);

// CSV "epoch,user,observed,expected,statistic,flagged,truth".
void write_tda_csv(const TdaScanResult& result, const CommGraph& graph, std::ostream& out);

}  // namespace fmd

#endif  // FMD_ATTACKS_HPP_
