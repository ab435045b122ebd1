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

// LambdaRank over a user's training candidates.
//
// For a pair (i, j) with unequal labels, S = +1 when i is the positive,
// o = f_i - f_j, and the logistic pair cost is C = softplus(-S o). The
// lambda for the pair is S * |delta(metric) * dC/do|, where delta is the
// change of the whole-list metric when i and j exchange rank positions.
// The positive item receives +lambda and the negative -lambda.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rankopt/dataio.h"
#include "rankopt/metrics.h"
#include "rankopt/mf_model.h"

namespace rankopt {

double pair_cost(int sign, double score_diff);
double cost_derivative(int sign, double score_diff);

// Precomputes per-list state so each swap delta is O(log m).
class SwapDeltaTable {
 public:
  SwapDeltaTable(std::span<const int> ranks, std::span<const Label> labels);

  // |metric(after swapping ranks of a positive at `pos_rank` and a negative
  // at `neg_rank`) - metric(before)|.
  double delta(const MetricKind& kind, int pos_rank, int neg_rank) const;

  int num_positives() const { return static_cast<int>(pos_ranks_.size()); }

 private:
  double delta_ap(int pos_rank, int neg_rank) const;
  double delta_rr(int pos_rank, int neg_rank) const;
  // p^(r-1) for r = 1..list size, rebuilt when p changes.
  double rbp_weight(double p, int rank) const;

  std::vector<int> pos_ranks_;         // ascending
  std::vector<double> inv_prefix_;     // inv_prefix_[k] = sum_{t<k} 1/pos_ranks_[t]
  double idcg_ = 0.0;
  std::size_t list_size_ = 0;
  mutable double cached_p_ = -1.0;
  mutable std::vector<double> rbp_weights_;
};

// Closed-form |delta| for swapping items i and j of one list. Throws
// ContractViolation when labels[i] == labels[j] or i == j.
double swap_delta(const MetricKind& kind, std::span<const int> ranks,
                  std::span<const Label> labels, int i, int j);

struct PairContext {
  int sign = 1;             // +1 when the first item is the positive
  double score_diff = 0.0;  // f_first - f_second
  int first_rank = 0;
  int second_rank = 0;
};

// lambda = S * |delta * dC/do| for the pair described by `ctx`, evaluated
// against `table` (which knows the list's labels and m_u).
double lambda_gradient(const MetricKind& kind, const PairContext& ctx,
                       const SwapDeltaTable& table);

// Per-item lambda accumulation for one user's list: out[k] is the ascent
// gradient on item k's score. Equal-label pairs contribute nothing.
struct LambdaStats {
  long pairs = 0;
  double sum_abs_lambda = 0.0;
};
LambdaStats accumulate_lambdas(const MetricKind& kind,
                               std::span<const double> scores,
                               std::span<const int> ranks,
                               std::span<const Label> labels,
                               std::span<double> out);

struct EpochDiagnostics {
  int epoch = 0;
  double mean_value = 0.0;   // pairwise: mean |lambda|; listwise: mean loss
  double grad_norm = 0.0;    // listwise only
  long pair_count = 0;       // pairwise only

  bool operator==(const EpochDiagnostics&) const = default;
};

// One pass over all users in a seeded random order; each user gets one
// accumulated update. Throws TrainingError on a non-finite lambda.
EpochDiagnostics train_epoch_pairwise(FactorModel& model,
                                      const SplitAssignment& split,
                                      const MetricKind& kind,
                                      const SgdConfig& cfg, int epoch);

// User visit order for an epoch, shared by both paradigms.
std::vector<int> epoch_user_order(int n_users, std::uint64_t seed, int epoch);

}  // namespace rankopt
