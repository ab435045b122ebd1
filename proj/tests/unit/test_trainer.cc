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

#include <sstream>

#include "rankopt/errors.h"
#include "rankopt/trainer.h"

namespace rankopt {
namespace {

struct SmallSetup {
  InteractionSet set = generate_synthetic(30, 80, 4, 25, 5);
  SplitAssignment split =
      sample_negatives(split_train_test(set, 0, 5), set, 1.0, 5);
};

TrainConfig small_config(Paradigm paradigm, const std::string& loss) {
  TrainConfig cfg;
  cfg.paradigm = paradigm;
  cfg.loss = LossSpec::parse(loss);
  cfg.epochs = 6;
  cfg.eval_every = 4;
  cfg.dim = 4;
  cfg.seed = 3;
  cfg.learning_rate = paradigm == Paradigm::kPairwise ? 0.1 : 1.0;
  return cfg;
}

TrainHistory fake_history(std::vector<double> values) {
  TrainHistory h;
  h.metrics = {MetricKind::rr()};
  for (std::size_t e = 0; e < values.size(); ++e) {
    h.evaluated_epochs.push_back(static_cast<int>(e) * 10);
    h.aggregates.push_back({values[e]});
  }
  return h;
}

TEST(LossSpec, ParseAndValidate) {
  auto nrbp = LossSpec::parse("NRBP@0.9");
  EXPECT_EQ(nrbp.family, MetricFamily::kNRBP);
  EXPECT_EQ(nrbp.p, 0.9);
  EXPECT_EQ(nrbp.name(), "NRBP@0.9");
  EXPECT_NO_THROW(nrbp.validate(Paradigm::kPairwise));
  EXPECT_THROW(nrbp.validate(Paradigm::kListwise), std::invalid_argument);
  auto bare = LossSpec::parse("nrbp");
  EXPECT_NO_THROW(bare.validate(Paradigm::kListwise));
  EXPECT_THROW(bare.validate(Paradigm::kPairwise), std::invalid_argument);
  EXPECT_THROW(LossSpec::parse("RBP@0.8").validate(Paradigm::kPairwise),
               std::invalid_argument);
  EXPECT_THROW(LossSpec::parse("AP@0.5").validate(Paradigm::kPairwise),
               std::invalid_argument);
}

TEST(LossSpec, TargetMetrics) {
  EXPECT_EQ(LossSpec::parse("NRBP").target_metrics().size(), 3u);
  EXPECT_EQ(LossSpec::parse("NRBP@0.8").target_metrics(),
            (std::vector<MetricKind>{MetricKind::nrbp(0.8)}));
  EXPECT_EQ(LossSpec::parse("AP").target_metrics(),
            (std::vector<MetricKind>{MetricKind::ap()}));
}

TEST(Protocol, GridsAndLosses) {
  EXPECT_EQ(pairwise_protocol_losses().size(), 6u);
  EXPECT_EQ(listwise_protocol_losses().size(), 4u);
  EXPECT_EQ(pairwise_lr_grid(), (std::vector<double>{0.001, 0.01, 0.1}));
  EXPECT_EQ(listwise_lr_grid(),
            (std::vector<double>{0.001, 0.01, 0.1, 1.0, 3.0, 10.0}));
  EXPECT_EQ(parse_paradigm(paradigm_name(Paradigm::kListwise)),
            Paradigm::kListwise);
}

TEST(TrainConfig, Validation) {
  auto cfg = small_config(Paradigm::kPairwise, "AP");
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config(Paradigm::kPairwise, "AP");
  cfg.eval_every = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Train, ZeroEpochsGivesOnlyInitialReport) {
  SmallSetup s;
  auto cfg = small_config(Paradigm::kPairwise, "NDCG");
  cfg.epochs = 0;
  auto h = train(cfg, s.split, s.set);
  EXPECT_EQ(h.evaluated_epochs, (std::vector<int>{0}));
  EXPECT_EQ(h.aggregates.size(), 1u);
  EXPECT_TRUE(h.diagnostics.empty());
}

TEST(Train, EvaluationSchedule) {
  SmallSetup s;
  auto h = train(small_config(Paradigm::kListwise, "AP"), s.split, s.set);
  EXPECT_EQ(h.evaluated_epochs, (std::vector<int>{0, 4, 6}));
  EXPECT_EQ(h.diagnostics.size(), 6u);
  EXPECT_FALSE(h.diverged);
}

TEST(Train, Deterministic) {
  SmallSetup s;
  for (auto [paradigm, loss] :
       {std::pair{Paradigm::kPairwise, "NRBP@0.8"},
        std::pair{Paradigm::kListwise, "RR"}}) {
    auto cfg = small_config(paradigm, loss);
    EXPECT_EQ(train(cfg, s.split, s.set), train(cfg, s.split, s.set));
  }
}

TEST(Train, DivergenceIsRecorded) {
  SmallSetup s;
  auto cfg = small_config(Paradigm::kListwise, "NRBP");
  cfg.learning_rate = 1e300;
  cfg.epochs = 20;
  auto h = train(cfg, s.split, s.set);
  EXPECT_TRUE(h.diverged);
  EXPECT_GT(h.failed_epoch, 0);
  EXPECT_FALSE(h.failure.empty());
  EXPECT_FALSE(h.evaluated_epochs.empty());
}

TEST(Train, KeepsBestModels) {
  SmallSetup s;
  auto cfg = small_config(Paradigm::kPairwise, "AP");
  cfg.keep_best_models = true;
  auto h = train(cfg, s.split, s.set);
  EXPECT_EQ(h.best_models.size(), protocol_metrics().size());
  const auto best = select_best(h, MetricKind::ap());
  auto report = evaluate_all(h.best_models.at(MetricKind::ap()), s.split,
                             {MetricKind::ap()});
  EXPECT_DOUBLE_EQ(report.value(MetricKind::ap()), best.value);
}

TEST(SelectBest, MonotoneAndTies) {
  auto up = fake_history({0.1, 0.2, 0.3});
  EXPECT_EQ(select_best(up, MetricKind::rr()).epoch, 20);
  auto tie = fake_history({0.1, 0.5, 0.5, 0.2});
  EXPECT_EQ(select_best(tie, MetricKind::rr()).epoch, 10);
  EXPECT_DOUBLE_EQ(select_best(tie, MetricKind::rr()).value, 0.5);
  EXPECT_THROW(select_best(up, MetricKind::ap()), ContractViolation);
  EXPECT_THROW(select_best(TrainHistory{{}, {MetricKind::rr()}, {}, {}, false,
                                        {}, -1, {}},
                           MetricKind::rr()),
               ContractViolation);
}

TEST(SelectBest, ListwiseNrbpServesThreePersistences) {
  SmallSetup s;
  auto h = train(small_config(Paradigm::kListwise, "NRBP"), s.split, s.set);
  for (double p : protocol_persistences()) {
    auto b = select_best(h, MetricKind::nrbp(p));
    EXPECT_GE(b.value, 0.0);
    EXPECT_LE(b.value, 1.0);
  }
}

TEST(SelectLearningRate, SkipsDivergedAndPrefersSmallerOnTies) {
  std::vector<LrRun> runs{{0.01, fake_history({0.2, 0.4})},
                          {0.1, fake_history({0.4, 0.3})},
                          {1.0, fake_history({0.9})}};
  runs[2].history.diverged = true;
  EXPECT_EQ(select_learning_rate(runs, MetricKind::rr()), 0);
  runs[0].history.diverged = true;
  EXPECT_EQ(select_learning_rate(runs, MetricKind::rr()), 1);
  runs[1].history.diverged = true;
  EXPECT_EQ(select_learning_rate(runs, MetricKind::rr()), -1);
}

TEST(LrSearch, SingletonGrid) {
  SmallSetup s;
  auto cfg = small_config(Paradigm::kPairwise, "RR");
  auto r = lr_search(cfg, s.split, s.set, {0.05}, MetricKind::rr());
  EXPECT_FALSE(r.all_diverged);
  EXPECT_EQ(r.best_config.learning_rate, 0.05);
  EXPECT_EQ(select_best(r.best_history, MetricKind::rr()).epoch, r.best.epoch);
}

TEST(History, RoundTripsThroughCsv) {
  SmallSetup s;
  auto h = train(small_config(Paradigm::kPairwise, "NDCG"), s.split, s.set);
  std::stringstream buf;
  write_history(buf, h);
  auto back = read_history(buf);
  EXPECT_EQ(back.evaluated_epochs, h.evaluated_epochs);
  EXPECT_EQ(back.metrics, h.metrics);
  EXPECT_EQ(back.aggregates, h.aggregates);
}

TEST(History, ReloadReproducesSelections) {
  SmallSetup s;
  auto h = train(small_config(Paradigm::kListwise, "NRBP"), s.split, s.set);
  std::stringstream buf;
  write_history(buf, h);
  auto back = read_history(buf);
  for (const auto& m : protocol_metrics()) {
    const auto a = select_best(h, m);
    const auto b = select_best(back, m);
    EXPECT_EQ(a.epoch, b.epoch);
    EXPECT_EQ(a.value, b.value);
    for (const auto& row : h.aggregates) {
      EXPECT_GE(a.value, row[&m - &protocol_metrics()[0]]);
    }
  }
}

TEST(History, FailureRowRoundTrips) {
  auto h = fake_history({0.3});
  h.diverged = true;
  h.failed_epoch = 12;
  h.failure = "non-finite score";
  std::stringstream buf;
  write_history(buf, h);
  auto back = read_history(buf);
  EXPECT_TRUE(back.diverged);
  EXPECT_EQ(back.failed_epoch, 12);
}

TEST(TrainingLog, OneRowPerEpoch) {
  SmallSetup s;
  auto h = train(small_config(Paradigm::kPairwise, "AP"), s.split, s.set);
  std::stringstream buf;
  write_training_log(buf, h);
  std::string line;
  int rows = 0;
  while (std::getline(buf, line)) ++rows;
  EXPECT_EQ(rows, 1 + 6);
}

}  // namespace
}  // namespace rankopt
