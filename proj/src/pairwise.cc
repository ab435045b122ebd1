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

#include "rankopt/pairwise.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rankopt/errors.h"
#include "rankopt/random.h"

namespace rankopt {

double pair_cost(int sign, double score_diff) {
  // -S o + ln(1 + e^{S o}) == softplus(-S o)
  const double x = -sign * score_diff;
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double cost_derivative(int sign, double score_diff) {
  // -S / (1 + e^{S o}) == -S * sigmoid(-S o)
  const double x = -sign * score_diff;
  const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
  return -sign * sig;
}

SwapDeltaTable::SwapDeltaTable(std::span<const int> ranks,
                               std::span<const Label> labels) {
  if (ranks.size() != labels.size()) {
    throw std::invalid_argument("ranks and labels differ in length");
  }
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i]) pos_ranks_.push_back(ranks[i]);
  }
  std::sort(pos_ranks_.begin(), pos_ranks_.end());
  inv_prefix_.assign(pos_ranks_.size() + 1, 0.0);
  for (std::size_t k = 0; k < pos_ranks_.size(); ++k) {
    inv_prefix_[k + 1] = inv_prefix_[k] + 1.0 / pos_ranks_[k];
  }
  idcg_ = ideal_dcg(num_positives());
  list_size_ = ranks.size();
}

double SwapDeltaTable::rbp_weight(double p, int rank) const {
  if (p != cached_p_) {
    rbp_weights_.resize(list_size_ + 1);
    double w = 1.0;
    for (std::size_t r = 1; r <= list_size_; ++r) {
      rbp_weights_[r] = w;
      w *= p;
    }
    cached_p_ = p;
  }
  if (rank < 1 || static_cast<std::size_t>(rank) > list_size_) {
    return std::pow(p, rank - 1);
  }
  return rbp_weights_[rank];
}

double SwapDeltaTable::delta_rr(int pos_rank, int neg_rank) const {
  const int top = pos_ranks_.front();
  int new_top;
  if (pos_rank == top) {
    new_top = pos_ranks_.size() > 1 ? std::min(neg_rank, pos_ranks_[1]) : neg_rank;
  } else {
    new_top = std::min(top, neg_rank);
  }
  return std::abs(1.0 / new_top - 1.0 / top);
}

// AP * m = sum_k k / q_k over ascending positive ranks q. Moving the k-th
// positive from rank a to rank b shifts the index of every positive strictly
// between a and b by one; the prefix sums of 1/q give that shift in O(1).
double SwapDeltaTable::delta_ap(int pos_rank, int neg_rank) const {
  const auto begin = pos_ranks_.begin();
  const int k = static_cast<int>(
                    std::lower_bound(begin, pos_ranks_.end(), pos_rank) - begin) +
                1;
  const int below_b = static_cast<int>(
      std::lower_bound(begin, pos_ranks_.end(), neg_rank) - begin);
  double change;
  if (neg_rank > pos_rank) {
    const int l = below_b;  // the moved positive becomes the l-th
    change = static_cast<double>(l) / neg_rank -
             static_cast<double>(k) / pos_rank -
             (inv_prefix_[l] - inv_prefix_[k]);
  } else {
    const int h = below_b + 1;  // the moved positive becomes the h-th
    change = static_cast<double>(h) / neg_rank -
             static_cast<double>(k) / pos_rank +
             (inv_prefix_[k - 1] - inv_prefix_[h - 1]);
  }
  return std::abs(change) / num_positives();
}

double SwapDeltaTable::delta(const MetricKind& kind, int pos_rank,
                             int neg_rank) const {
  if (pos_ranks_.empty()) {
    throw ContractViolation("swap delta needs at least one positive");
  }
  switch (kind.family) {
    case MetricFamily::kNDCG:
      return std::abs(1.0 / std::log2(pos_rank + 1.0) -
                      1.0 / std::log2(neg_rank + 1.0)) /
             idcg_;
    case MetricFamily::kAP:
      return delta_ap(pos_rank, neg_rank);
    case MetricFamily::kRR:
      return delta_rr(pos_rank, neg_rank);
    case MetricFamily::kRBP:
      return (1.0 - kind.p) *
             std::abs(rbp_weight(kind.p, pos_rank) - rbp_weight(kind.p, neg_rank));
    case MetricFamily::kNRBP:
      return nrbp_normalizer(kind.p, num_positives()) * (1.0 - kind.p) *
             std::abs(rbp_weight(kind.p, pos_rank) - rbp_weight(kind.p, neg_rank));
  }
  throw std::invalid_argument("unknown metric family");
}

double swap_delta(const MetricKind& kind, std::span<const int> ranks,
                  std::span<const Label> labels, int i, int j) {
  if (i == j || labels[i] == labels[j]) {
    throw ContractViolation("swap delta requires a positive/negative pair");
  }
  SwapDeltaTable table(ranks, labels);
  const int pos = labels[i] ? i : j;
  const int neg = labels[i] ? j : i;
  return table.delta(kind, ranks[pos], ranks[neg]);
}

double lambda_gradient(const MetricKind& kind, const PairContext& ctx,
                       const SwapDeltaTable& table) {
  const int pos_rank = ctx.sign > 0 ? ctx.first_rank : ctx.second_rank;
  const int neg_rank = ctx.sign > 0 ? ctx.second_rank : ctx.first_rank;
  const double d = table.delta(kind, pos_rank, neg_rank);
  return ctx.sign * std::abs(d * cost_derivative(ctx.sign, ctx.score_diff));
}

LambdaStats accumulate_lambdas(const MetricKind& kind,
                               std::span<const double> scores,
                               std::span<const int> ranks,
                               std::span<const Label> labels,
                               std::span<double> out) {
  LambdaStats stats;
  std::fill(out.begin(), out.end(), 0.0);
  SwapDeltaTable table(ranks, labels);
  if (table.num_positives() == 0) return stats;
  const std::size_t n = scores.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j]) continue;
      PairContext ctx{1, scores[i] - scores[j], ranks[i], ranks[j]};
      const double lambda = lambda_gradient(kind, ctx, table);
      out[i] += lambda;
      out[j] -= lambda;
      ++stats.pairs;
      stats.sum_abs_lambda += std::abs(lambda);
    }
  }
  return stats;
}

std::vector<int> epoch_user_order(int n_users, std::uint64_t seed, int epoch) {
  std::vector<int> order(n_users);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(RngStream::kEpochOrder,
                      {seed, static_cast<std::uint64_t>(epoch)});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

EpochDiagnostics train_epoch_pairwise(FactorModel& model,
                                      const SplitAssignment& split,
                                      const MetricKind& kind,
                                      const SgdConfig& cfg, int epoch) {
  EpochDiagnostics diag;
  diag.epoch = epoch;
  std::vector<int> items;
  std::vector<Label> labels;
  std::vector<double> grad;
  double sum_abs = 0.0;
  for (int u : epoch_user_order(static_cast<int>(split.users.size()), cfg.seed,
                                epoch)) {
    const auto& us = split.users[u];
    if (us.train_pos.empty() || us.train_neg.empty()) continue;
    items.assign(us.train_pos.begin(), us.train_pos.end());
    items.insert(items.end(), us.train_neg.begin(), us.train_neg.end());
    labels.assign(us.train_pos.size(), 1);
    labels.resize(items.size(), 0);
    grad.assign(items.size(), 0.0);
    const auto scores = predict_scores(model, u, items);
    if (!std::all_of(scores.begin(), scores.end(),
                     [](double s) { return std::isfinite(s); })) {
      throw TrainingError("non-finite score at epoch " + std::to_string(epoch) +
                              ", user " + std::to_string(u),
                          epoch, u);
    }
    const auto ranks = exact_ranks(scores, items);
    const auto stats = accumulate_lambdas(kind, scores, ranks, labels, grad);
    if (!std::isfinite(stats.sum_abs_lambda)) {
      throw TrainingError("non-finite lambda at epoch " + std::to_string(epoch) +
                              ", user " + std::to_string(u),
                          epoch, u);
    }
    diag.pair_count += stats.pairs;
    sum_abs += stats.sum_abs_lambda;
    try {
      apply_score_gradients(model, u, items, grad, cfg);
    } catch (const TrainingError& e) {
      throw TrainingError(std::string(e.what()) + " at epoch " +
                              std::to_string(epoch),
                          epoch, u);
    }
  }
  diag.mean_value = diag.pair_count > 0 ? sum_abs / diag.pair_count : 0.0;
  return diag;
}

}  // namespace rankopt
