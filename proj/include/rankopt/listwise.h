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

// Listwise losses over sigmoid-smoothed ranks.
//
// The smoothed rank of item i is 1 + sum_{j != i} sigmoid(f_j - f_i). Each
// loss is the negated smooth surrogate of a metric over the whole candidate
// list (no cutoff). The nRBP loss, sum over positives of (R~_i - 1) minus
// sum_{j=1..m} (j - 1), carries no persistence parameter at all.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rankopt/dataio.h"
#include "rankopt/metrics.h"
#include "rankopt/mf_model.h"
#include "rankopt/pairwise.h"

namespace rankopt {

enum class ListLossKind { kRR, kAP, kNDCG, kNRBP };

std::string list_loss_name(ListLossKind kind);
ListLossKind parse_list_loss(const std::string& text);

double sigmoid(double x);

// Throws std::invalid_argument on NaN input.
std::vector<double> smooth_ranks(std::span<const double> scores);

struct SmoothedList {
  std::vector<double> scores;
  std::vector<Label> labels;
  std::vector<double> smoothed_ranks;

  static SmoothedList build(std::vector<double> scores,
                            std::vector<Label> labels);
  int num_positives() const;
};

double loss_ndcg(const SmoothedList& list);
double loss_ap(const SmoothedList& list);
double loss_rr(const SmoothedList& list);
double loss_nrbp(const SmoothedList& list);
double list_loss(ListLossKind kind, const SmoothedList& list);

// The nRBP loss with exact integer ranks in place of smoothed ones.
double nrbp_rank_loss(std::span<const int> ranks, std::span<const Label> labels);

// d loss / d f_k for every item of the list.
std::vector<double> loss_gradients(ListLossKind kind, const SmoothedList& list);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

// Loss and gradient from a single pass over the pairwise sigmoids. Agrees
// with list_loss() and loss_gradients() up to rounding.
LossAndGradient list_loss_and_gradients(ListLossKind kind,
                                        std::span<const double> scores,
                                        std::span<const Label> labels);

// One pass over all users in a seeded order; each user takes one descent
// step on its loss. `mean_value` in the result is the mean per-user loss and
// `grad_norm` the L2 norm of the concatenated score gradients.
EpochDiagnostics train_epoch_listwise(FactorModel& model,
                                      const SplitAssignment& split,
                                      ListLossKind kind, const SgdConfig& cfg,
                                      int epoch);

}  // namespace rankopt
