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

// Grid runner and result analysis.
//
// A grid cell is one (dataset, split, NSR, paradigm, loss). Each cell trains
// one model per learning rate and reports, for every protocol evaluation
// metric, the best value over learning rates and evaluated epochs. Analysis
// products (standardized scores, best-loss frequencies, per-user score
// differences, bootstrap summaries) are plain CSV tables.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rankopt/dataio.h"
#include "rankopt/metrics.h"
#include "rankopt/mf_model.h"
#include "rankopt/trainer.h"

namespace rankopt {

struct SyntheticSpec {
  int n_users = 200;
  int n_items = 500;
  int latent_dim = 8;
  int positives_per_user = 25;
  std::uint64_t seed = 7;
};

// A prepared dataset directory holds dataset.json (name, n_users, n_items,
// num_ratings), interactions.tsv in the dense dump format and, for data read
// from a ratings file, user_keys.txt and item_keys.txt.
bool is_prepared_dataset(const std::string& path);
void save_prepared_dataset(const std::string& dir, const std::string& name,
                           const InteractionSet& set);
InteractionSet load_prepared_dataset(const std::string& dir);

struct DatasetSource {
  std::string name;
  // Either a ratings file or prepared dataset directory...
  std::string path;
  RatingFormat format = RatingFormat::kUnary;
  int positive_threshold = 4;
  int min_positives = 25;
  // ...or a synthetic generator.
  std::optional<SyntheticSpec> synthetic;

  InteractionSet load() const;
};

struct GridSpec {
  std::vector<DatasetSource> datasets;
  std::vector<int> splits = {0, 1, 2};
  std::uint64_t split_seed = 0;
  std::vector<double> nsrs = {1.0, 2.0, 5.0};
  std::vector<Paradigm> paradigms = {Paradigm::kPairwise, Paradigm::kListwise};
  std::vector<LossSpec> pairwise_losses = pairwise_protocol_losses();
  std::vector<LossSpec> listwise_losses = listwise_protocol_losses();
  std::vector<double> pairwise_lrs = pairwise_lr_grid();
  std::vector<double> listwise_lrs = listwise_lr_grid();
  int epochs = 3000;
  int eval_every = 10;
  int dim = kDefaultLatentDim;
  double l2 = 0.0;
  double init_std = kDefaultInitStd;
  std::uint64_t train_seed = 0;

  void validate() const;
};

// JSON grid config; see docs/grid_spec.md for the schema.
GridSpec parse_grid_spec(const std::string& json_text);
GridSpec load_grid_spec(const std::string& path);
std::string grid_spec_to_json(const GridSpec& spec);

struct GridCell {
  std::string dataset;
  int split_id = 0;
  double nsr = 1.0;
  Paradigm paradigm = Paradigm::kPairwise;
  LossSpec loss;
};

struct GridResultRow {
  std::string dataset;
  int split_id = 0;
  double nsr = 1.0;
  Paradigm paradigm = Paradigm::kPairwise;
  std::string loss;
  MetricKind eval_metric;
  double value = 0.0;
  int best_epoch = 0;
  double learning_rate = 0.0;

  bool operator==(const GridResultRow&) const = default;
};

struct CellFailure {
  GridCell cell;
  std::string reason;
};

struct GridResult {
  std::vector<GridResultRow> rows;
  std::vector<CellFailure> failures;
};

// Every cell of the grid in output order: dataset, split, NSR, paradigm, loss.
std::vector<GridCell> enumerate_cells(const GridSpec& spec);

// Runs a single cell against an already loaded dataset.
std::vector<GridResultRow> run_cell(const GridSpec& spec, const GridCell& cell,
                                    const InteractionSet& set);

// One row per protocol evaluation metric: the best value over the learning
// rates of `runs` and their evaluated epochs. Throws DataError if every run
// diverged.
std::vector<GridResultRow> cell_rows(const GridCell& cell,
                                     const std::vector<LrRun>& runs);

struct GridOptions {
  std::string out_dir;  // empty: no cell cache, no files
  bool resume = false;
  int workers = 1;
};

// Runs the full grid. With an out_dir, each finished cell is cached under
// out_dir/cells/ keyed by a hash of its configuration; `resume` reuses the
// cache. Output order never depends on `workers`.
GridResult run_grid(const GridSpec& spec, const GridOptions& options = {});

struct StandardizedRow {
  GridResultRow row;
  double z_value = 0.0;
  bool degenerate = false;  // zero-variance group
};

// z = (value - mean) / sd within (dataset, nsr, eval_metric), using the
// population standard deviation, so every group with spread has mean 0 and
// standard deviation 1.
std::vector<StandardizedRow> standardize(const std::vector<GridResultRow>& rows);

struct FrequencyRow {
  std::string dataset;
  Paradigm paradigm = Paradigm::kPairwise;
  MetricKind eval_metric;
  std::string loss;
  int count = 0;
};

// For each (dataset, paradigm, eval_metric), counts over the (split, nsr)
// cells how often each loss attains the maximum; ties credit every tied loss.
// Throws DataError listing missing cells if some loss lacks a row.
std::vector<FrequencyRow> best_loss_frequency(
    const std::vector<GridResultRow>& rows);

struct UserDiff {
  int user = 0;
  int train_positives = 0;
  double diff = 0.0;  // value_a - value_b
};

std::vector<UserDiff> per_user_diff(const FactorModel& model_a,
                                    const FactorModel& model_b,
                                    const SplitAssignment& split,
                                    const MetricKind& eval_metric);

// Pearson correlation of diff against train_positives; 0 if either is
// constant.
double diff_activity_correlation(const std::vector<UserDiff>& diffs);

struct SummaryRow {
  Paradigm paradigm = Paradigm::kPairwise;
  std::string loss;
  MetricKind eval_metric;
  int n = 0;
  double mean_z = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Mean z per (paradigm, loss, eval_metric) with percentile bootstrap
// intervals. This is a plain summary of standardized scores, not a fitted
// linear model.
std::vector<SummaryRow> summarize(const std::vector<StandardizedRow>& rows,
                                  int resamples = 1000,
                                  double confidence = 0.95,
                                  std::uint64_t seed = 0);

void write_results(std::ostream& out, const std::vector<GridResultRow>& rows);
std::vector<GridResultRow> read_results(std::istream& in);
void write_failures(std::ostream& out, const std::vector<CellFailure>& failures);
void write_standardized(std::ostream& out,
                        const std::vector<StandardizedRow>& rows);
void write_frequency(std::ostream& out, const std::vector<FrequencyRow>& rows);
void write_per_user_diff(std::ostream& out, const std::vector<UserDiff>& diffs);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace rankopt
