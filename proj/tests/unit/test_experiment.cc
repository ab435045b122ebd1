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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "rankopt/errors.h"
#include "rankopt/experiment.h"

namespace rankopt {
namespace {

namespace fs = std::filesystem;

const char* kTinyGrid = R"({
  "datasets": [{"name": "syn", "synthetic": {"n_users": 12, "n_items": 60,
                "latent_dim": 3, "positives_per_user": 25, "seed": 2}}],
  "paradigms": ["pairwise"],
  "pairwise_losses": ["AP"],
  "pairwise_lr_grid": [0.1],
  "epochs": 3,
  "eval_every": 2,
  "dim": 4,
  "train_seed": 5
})";

GridResultRow row(std::string loss, int split, double nsr, double value,
                  MetricKind metric = MetricKind::ap()) {
  GridResultRow r;
  r.dataset = "d";
  r.split_id = split;
  r.nsr = nsr;
  r.loss = std::move(loss);
  r.eval_metric = metric;
  r.value = value;
  return r;
}

// Complete 3-split x 3-NSR table for the given losses; value(loss, s, n).
template <typename F>
std::vector<GridResultRow> full_table(const std::vector<std::string>& losses,
                                      F value) {
  std::vector<GridResultRow> rows;
  for (int s = 0; s < 3; ++s) {
    for (double n : {1.0, 2.0, 5.0}) {
      for (const auto& l : losses) rows.push_back(row(l, s, n, value(l, s, n)));
    }
  }
  return rows;
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

TEST(GridSpec, ParsesAndRoundTrips) {
  auto spec = parse_grid_spec(kTinyGrid);
  ASSERT_EQ(spec.datasets.size(), 1u);
  ASSERT_TRUE(spec.datasets[0].synthetic.has_value());
  EXPECT_EQ(spec.datasets[0].synthetic->n_users, 12);
  EXPECT_EQ(spec.splits, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(spec.nsrs, (std::vector<double>{1.0, 2.0, 5.0}));
  EXPECT_EQ(spec.epochs, 3);
  auto again = parse_grid_spec(grid_spec_to_json(spec));
  EXPECT_EQ(grid_spec_to_json(again), grid_spec_to_json(spec));
}

TEST(GridSpec, RejectsInvalid) {
  EXPECT_THROW(parse_grid_spec(R"({"datasets": []})"), std::invalid_argument);
  EXPECT_THROW(parse_grid_spec(R"({"datasets": [{"name": "x",
      "synthetic": {}}], "listwise_losses": ["NRBP@0.9"]})"),
               std::invalid_argument);
  EXPECT_ANY_THROW(parse_grid_spec("{not json"));
}

TEST(EnumerateCells, ProtocolGridSize) {
  GridSpec spec;
  spec.datasets.push_back({"a", "", RatingFormat::kUnary, 4, 25, SyntheticSpec{}});
  // 3 splits x 3 nsr x (6 pairwise + 4 listwise losses)
  EXPECT_EQ(enumerate_cells(spec).size(), 90u);
}

TEST(RunGrid, FiftyFourRowsAndResumable) {
  auto spec = parse_grid_spec(kTinyGrid);
  auto dir = fresh_dir("rankopt_grid_test");
  auto first = run_grid(spec, {dir.string(), false, 1});
  EXPECT_TRUE(first.failures.empty());
  EXPECT_EQ(first.rows.size(), 54u);
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "cells"),
                          fs::directory_iterator{}),
            9);
  // Remove part of the cache, as if interrupted, and resume.
  int removed = 0;
  for (const auto& e : fs::directory_iterator(dir / "cells")) {
    if (removed++ % 2 == 0) fs::remove(e.path());
  }
  auto resumed = run_grid(spec, {dir.string(), true, 1});
  EXPECT_EQ(resumed.rows, first.rows);
  fs::remove_all(dir);
}

TEST(RunGrid, WorkerCountDoesNotChangeOutput) {
  auto spec = parse_grid_spec(kTinyGrid);
  spec.nsrs = {1.0};
  EXPECT_EQ(run_grid(spec, {"", false, 1}).rows,
            run_grid(spec, {"", false, 3}).rows);
}

TEST(RunGrid, DivergedCellsBecomeFailures) {
  auto spec = parse_grid_spec(kTinyGrid);
  spec.splits = {0};
  spec.nsrs = {1.0};
  spec.pairwise_lrs = {1e300};
  spec.epochs = 4;
  auto result = run_grid(spec);
  EXPECT_TRUE(result.rows.empty());
  ASSERT_EQ(result.failures.size(), 1u);
  std::ostringstream out;
  write_failures(out, result.failures);
  EXPECT_NE(out.str().find("diverged"), std::string::npos);
}

TEST(Results, CsvRoundTrip) {
  auto spec = parse_grid_spec(kTinyGrid);
  spec.splits = {0};
  spec.nsrs = {2.0};
  auto rows = run_grid(spec).rows;
  std::stringstream buf;
  write_results(buf, rows);
  EXPECT_EQ(read_results(buf), rows);
}

TEST(Standardize, TwoValueGroup) {
  auto z = standardize({row("a", 0, 1.0, 0.4), row("b", 0, 1.0, 0.6)});
  EXPECT_NEAR(z[0].z_value, -1.0, 1e-12);
  EXPECT_NEAR(z[1].z_value, 1.0, 1e-12);
  EXPECT_FALSE(z[0].degenerate);
}

TEST(Standardize, ConstantGroupIsFlagged) {
  auto z = standardize({row("a", 0, 1.0, 0.5), row("b", 1, 1.0, 0.5)});
  for (const auto& r : z) {
    EXPECT_EQ(r.z_value, 0.0);
    EXPECT_TRUE(r.degenerate);
  }
}

TEST(Standardize, GroupsHaveZeroMeanUnitSd) {
  auto rows = full_table({"a", "b", "c"}, [](const std::string& l, int s,
                                             double n) {
    return std::sin(l[0] * 1.7 + s * 0.3 + n);
  });
  auto extra = full_table({"a"}, [](auto, int s, double) { return 0.1 * s; });
  for (auto& r : extra) r.eval_metric = MetricKind::rr();
  rows.insert(rows.end(), extra.begin(), extra.end());
  std::map<std::pair<double, MetricKind>, std::vector<double>> groups;
  for (const auto& r : standardize(rows)) {
    groups[{r.row.nsr, r.row.eval_metric}].push_back(r.z_value);
  }
  EXPECT_EQ(groups.size(), 6u);
  for (const auto& [key, zs] : groups) {
    double mean = 0.0, sq = 0.0;
    for (double z : zs) mean += z;
    mean /= zs.size();
    for (double z : zs) sq += (z - mean) * (z - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(sq / zs.size()), 1.0, 1e-9);
  }
}

TEST(Standardize, Idempotent) {
  auto rows = full_table({"a", "b"}, [](const std::string& l, int s, double n) {
    return l[0] * 0.01 + s * 0.2 + n * 0.03;
  });
  auto once = standardize(rows);
  std::vector<GridResultRow> z_rows;
  for (const auto& r : once) {
    z_rows.push_back(r.row);
    z_rows.back().value = r.z_value;
  }
  auto twice = standardize(z_rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(twice[i].z_value, once[i].z_value, 1e-9);
  }
}

TEST(BestLossFrequency, OneDominantLoss) {
  auto rows = full_table({"a", "b"}, [](const std::string& l, int, double) {
    return l == "a" ? 0.9 : 0.1;
  });
  auto freq = best_loss_frequency(rows);
  ASSERT_EQ(freq.size(), 2u);
  EXPECT_EQ(freq[0].loss, "a");
  EXPECT_EQ(freq[0].count, 9);
  EXPECT_EQ(freq[1].count, 0);
}

TEST(BestLossFrequency, TiesCreditEveryTiedLoss) {
  auto rows = full_table({"a", "b"}, [](const std::string& l, int s,
                                        double n) {
    if (s == 1 && n == 2.0) return 0.5;
    return l == "a" ? 0.9 : 0.1;
  });
  auto freq = best_loss_frequency(rows);
  EXPECT_EQ(freq[0].count + freq[1].count, 10);
}

TEST(BestLossFrequency, InvariantUnderPerCellAffineMaps) {
  auto rows = full_table({"a", "b", "c"}, [](const std::string& l, int s,
                                             double n) {
    return std::cos(l[0] + 2.0 * s + n);
  });
  auto mapped = rows;
  for (auto& r : mapped) r.value = (1.0 + r.split_id + r.nsr) * r.value - r.nsr;
  auto a = best_loss_frequency(rows);
  auto b = best_loss_frequency(mapped);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].count, b[i].count);
}

TEST(BestLossFrequency, IncompleteGridListsMissingCells) {
  auto rows = full_table({"a", "b"}, [](auto, int, double) { return 0.5; });
  rows.erase(rows.begin() + 3);
  try {
    best_loss_frequency(rows);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("b/AP/split 0/nsr 2"), std::string::npos)
        << e.what();
  }
}

TEST(PerUserDiff, IdenticalModelsGiveZero) {
  auto set = generate_synthetic(10, 60, 3, 25, 1);
  auto split = sample_negatives(split_train_test(set, 0, 1), set, 1.0, 1);
  auto model = init_model(10, 60, 4, 2, 0.5);
  auto diffs = per_user_diff(model, model, split, MetricKind::rr());
  ASSERT_EQ(diffs.size(), 10u);
  for (const auto& d : diffs) {
    EXPECT_EQ(d.diff, 0.0);
    EXPECT_EQ(d.train_positives, 20);
  }
  EXPECT_EQ(diff_activity_correlation(diffs), 0.0);
  auto other = init_model(9, 60, 4, 2, 0.5);
  EXPECT_THROW(per_user_diff(model, other, split, MetricKind::rr()),
               ContractViolation);
}

TEST(DiffActivityCorrelation, PerfectLinear) {
  std::vector<UserDiff> d{{0, 20, 0.1}, {1, 30, 0.2}, {2, 40, 0.3}};
  EXPECT_NEAR(diff_activity_correlation(d), 1.0, 1e-12);
}

StandardizedRow zrow(double z) {
  StandardizedRow r;
  r.row.loss = "a";
  r.z_value = z;
  return r;
}

TEST(Summarize, MeanAndIntervals) {
  auto s = summarize({zrow(-1.0), zrow(1.0)}, 500, 0.95, 3);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].n, 2);
  EXPECT_DOUBLE_EQ(s[0].mean_z, 0.0);
  EXPECT_LE(s[0].ci_low, 0.0);
  EXPECT_GE(s[0].ci_high, 0.0);
  auto again = summarize({zrow(-1.0), zrow(1.0)}, 500, 0.95, 3);
  EXPECT_EQ(again[0].ci_low, s[0].ci_low);
  EXPECT_EQ(again[0].ci_high, s[0].ci_high);
}

TEST(Summarize, SingleRowCollapses) {
  auto s = summarize({zrow(0.7)});
  EXPECT_DOUBLE_EQ(s[0].ci_low, 0.7);
  EXPECT_DOUBLE_EQ(s[0].ci_high, 0.7);
}

TEST(Writers, Headers) {
  std::ostringstream freq, diff, std_out, summ;
  write_frequency(freq, {});
  EXPECT_EQ(freq.str(), "dataset,paradigm,eval_metric,loss,count\n");
  write_per_user_diff(diff, {{3, 20, 0.25}});
  EXPECT_EQ(diff.str(), "user,train_positives,diff\n3,20,0.25\n");
  write_standardized(std_out, standardize({row("a", 0, 1.0, 0.4)}));
  EXPECT_EQ(std_out.str().substr(0, std_out.str().find('\n')),
            "dataset,split_id,nsr,paradigm,loss,eval_metric,value,best_epoch,"
            "learning_rate,z_value,degenerate");
  write_summary(summ, summarize({zrow(0.5)}, 10));
  EXPECT_EQ(summ.str().rfind("method,", 0), 0u);
}

}  // namespace
}  // namespace rankopt
