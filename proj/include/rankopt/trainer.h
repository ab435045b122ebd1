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

// Training runs: epoch loop, periodic test evaluation and best-epoch
// selection.
//
// Best epochs are selected on the test candidates. No separate validation
// split is carved out, which mirrors the experimental protocol this library
// reproduces but is optimistic compared to a held-out selection.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankopt/dataio.h"
#include "rankopt/listwise.h"
#include "rankopt/metrics.h"
#include "rankopt/mf_model.h"
#include "rankopt/pairwise.h"

namespace rankopt {

enum class Paradigm { kPairwise, kListwise };

std::string paradigm_name(Paradigm p);
Paradigm parse_paradigm(const std::string& text);

// The optimized objective. Pairwise nRBP carries a persistence; listwise
// nRBP must not.
struct LossSpec {
  MetricFamily family = MetricFamily::kNDCG;
  std::optional<double> p;

  // "RR", "AP", "NDCG", "NRBP" (listwise) or "NRBP@0.9" (pairwise).
  std::string name() const;
  static LossSpec parse(const std::string& text);
  // Throws std::invalid_argument if the loss is not valid for `paradigm`.
  void validate(Paradigm paradigm) const;
  MetricKind pairwise_metric() const;
  ListLossKind listwise_kind() const;
  // Evaluation metrics this loss is meant to optimize (three for listwise
  // nRBP, one otherwise).
  std::vector<MetricKind> target_metrics() const;

  auto operator<=>(const LossSpec&) const = default;
};

// {RR, AP, NDCG, NRBP@0.8, NRBP@0.9, NRBP@0.95}
const std::vector<LossSpec>& pairwise_protocol_losses();
// {RR, AP, NDCG, NRBP}
const std::vector<LossSpec>& listwise_protocol_losses();
const std::vector<double>& pairwise_lr_grid();  // {0.001, 0.01, 0.1}
const std::vector<double>& listwise_lr_grid();  // {0.001, 0.01, 0.1, 1, 3, 10}

struct TrainConfig {
  Paradigm paradigm = Paradigm::kPairwise;
  LossSpec loss;
  double learning_rate = 0.01;
  int epochs = 3000;
  int eval_every = 10;
  std::uint64_t seed = 0;
  double nsr = 1.0;
  int dim = kDefaultLatentDim;
  double l2 = 0.0;
  double init_std = kDefaultInitStd;
  // Keep a model snapshot at the best epoch of every evaluation metric.
  bool keep_best_models = false;

  void validate() const;
};

struct TrainHistory {
  std::vector<int> evaluated_epochs;
  std::vector<MetricKind> metrics;
  // aggregates[e][k] is metrics[k] at evaluated_epochs[e].
  std::vector<std::vector<double>> aggregates;
  std::vector<EpochDiagnostics> diagnostics;
  bool diverged = false;
  std::string failure;
  int failed_epoch = -1;
  std::map<MetricKind, FactorModel> best_models;

  bool operator==(const TrainHistory&) const = default;
};

// Evaluates `metrics` at epoch 0, after every eval_every-th epoch and after
// the last epoch. A divergence stops the run and is recorded on the history.
TrainHistory train(const TrainConfig& config, const SplitAssignment& split,
                   const InteractionSet& set,
                   const std::vector<MetricKind>& metrics = protocol_metrics());

struct BestEpoch {
  int epoch = 0;
  double value = 0.0;
};

// Argmax of the aggregate metric over evaluated epochs; ties go to the
// earliest epoch. Throws ContractViolation if the metric was not tracked or
// the history is empty.
BestEpoch select_best(const TrainHistory& history, const MetricKind& metric);

struct LrRun {
  double learning_rate = 0.0;
  TrainHistory history;
};

struct LrSearchResult {
  TrainConfig best_config;
  TrainHistory best_history;
  BestEpoch best;
  bool all_diverged = false;
};

// One run per learning rate in `grid` (ascending order of the grid as given).
std::vector<LrRun> train_lr_grid(const TrainConfig& base,
                                 const SplitAssignment& split,
                                 const InteractionSet& set,
                                 const std::vector<double>& grid,
                                 const std::vector<MetricKind>& metrics =
                                     protocol_metrics());

// Index into `runs` of the best non-diverged run for `metric`; ties go to the
// smaller learning rate. Returns -1 when every run diverged.
int select_learning_rate(const std::vector<LrRun>& runs,
                         const MetricKind& metric);

LrSearchResult lr_search(const TrainConfig& base, const SplitAssignment& split,
                         const InteractionSet& set,
                         const std::vector<double>& grid,
                         const MetricKind& target);

// `epoch,metric,p,value` rows; a failed run adds `#failed,<epoch>,<reason>`.
void write_history(std::ostream& out, const TrainHistory& history);
TrainHistory read_history(std::istream& in);

// Per-epoch diagnostics: `epoch,mean_value,grad_norm,pair_count`.
void write_training_log(std::ostream& out, const TrainHistory& history);

}  // namespace rankopt
