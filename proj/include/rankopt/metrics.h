/*
 * Copyright 2026 The rankopt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Exact ranking metrics with binary relevance and no cutoff.
//
// Every metric takes the 1-based rank of each candidate together with its
// binary label. Ranks come from exact_ranks(), which orders by descending
// score and breaks ties by ascending item id, so a rank vector is always a
// permutation of 1..N.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rankopt {

struct FactorModel;
struct SplitAssignment;

using Label = std::uint8_t;

enum class MetricFamily { kRR, kAP, kNDCG, kRBP, kNRBP };

// A metric identity. `p` is the persistence and is meaningful only for the
// RBP families; it is 0 otherwise.
struct MetricKind {
  MetricFamily family = MetricFamily::kNDCG;
  double p = 0.0;

  static MetricKind rr() { return {MetricFamily::kRR, 0.0}; }
  static MetricKind ap() { return {MetricFamily::kAP, 0.0}; }
  static MetricKind ndcg() { return {MetricFamily::kNDCG, 0.0}; }
  static MetricKind rbp(double p) { return {MetricFamily::kRBP, p}; }
  static MetricKind nrbp(double p) { return {MetricFamily::kNRBP, p}; }

  bool has_persistence() const {
    return family == MetricFamily::kRBP || family == MetricFamily::kNRBP;
  }
  // "RR", "AP", "NDCG", "RBP@0.8", "NRBP@0.95".
  std::string name() const;
  // Inverse of name(); also accepts lower case. Throws std::invalid_argument.
  static MetricKind parse(const std::string& text);

  auto operator<=>(const MetricKind&) const = default;
};

// The six evaluation metrics of the standard protocol:
// RR, AP, NDCG, NRBP@0.8, NRBP@0.9, NRBP@0.95.
const std::vector<MetricKind>& protocol_metrics();
const std::vector<double>& protocol_persistences();

std::vector<int> exact_ranks(std::span<const double> scores,
                             std::span<const int> item_ids);

// One user's candidate list with derived exact ranks.
struct RankedUserList {
  std::vector<Label> labels;
  std::vector<double> scores;
  std::vector<int> item_ids;
  std::vector<int> ranks;

  static RankedUserList from_scores(std::vector<double> scores,
                                    std::vector<Label> labels,
                                    std::vector<int> item_ids);
  // Builds a list directly from ranks, for tests and analytic checks.
  static RankedUserList from_ranks(std::vector<int> ranks,
                                   std::vector<Label> labels);
  int num_positives() const;
};

double ndcg(std::span<const int> ranks, std::span<const Label> labels);
double average_precision(std::span<const int> ranks,
                         std::span<const Label> labels);
double reciprocal_rank(std::span<const int> ranks,
                       std::span<const Label> labels);
double rbp(std::span<const int> ranks, std::span<const Label> labels, double p);
double nrbp(std::span<const int> ranks, std::span<const Label> labels,
            double p);

double ideal_dcg(int num_positives);
// Z(p, m) = 1 / (1 - p^m).
double nrbp_normalizer(double p, int num_positives);

double evaluate_user(const RankedUserList& list, const MetricKind& kind);
double evaluate(std::span<const int> ranks, std::span<const Label> labels,
                const MetricKind& kind);

struct EvalReport {
  std::vector<MetricKind> kinds;
  // per_user[k][u] is the value of kinds[k] for evaluated_users[u].
  std::vector<std::vector<double>> per_user;
  std::vector<int> evaluated_users;
  std::vector<int> excluded_users;
  std::map<MetricKind, double> aggregate;

  double value(const MetricKind& kind) const;
};

// Scores every user's test candidates (test positives + test negatives) and
// averages each metric over users without weighting. Users with no test
// positive are excluded and listed in `excluded_users`.
EvalReport evaluate_all(const FactorModel& model, const SplitAssignment& split,
                        const std::vector<MetricKind>& kinds);

// Rows `user,metric,p,value` followed by one `all` row per metric.
void write_eval_report(std::ostream& out, const EvalReport& report);

// Shortest round-trip decimal text for a double.
std::string format_double(double value);

}  // namespace rankopt
