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
#include <limits>
#include <random>
#include <sstream>

#include "oracles.h"
#include "rankopt/dataio.h"
#include "rankopt/errors.h"
#include "rankopt/metrics.h"
#include "rankopt/mf_model.h"

namespace rankopt {
namespace {

// Builds (ranks, labels) with the positives at the given ranks in a list of n.
RankedUserList list_with_positives(std::vector<int> pos_ranks, int n) {
  std::vector<int> ranks(n);
  std::vector<Label> labels(n, 0);
  for (int r = 1; r <= n; ++r) ranks[r - 1] = r;
  for (int r : pos_ranks) labels[r - 1] = 1;
  return RankedUserList::from_ranks(ranks, labels);
}

TEST(ExactRanks, DistinctScores) {
  std::vector<double> scores{0.9, 0.1, 0.5};
  std::vector<int> ids{0, 1, 2};
  EXPECT_EQ(exact_ranks(scores, ids), (std::vector<int>{1, 3, 2}));
}

TEST(ExactRanks, TiesBreakByAscendingItemId) {
  std::vector<double> scores{0.5, 0.5, 0.2};
  std::vector<int> ids{7, 3, 9};
  EXPECT_EQ(exact_ranks(scores, ids), (std::vector<int>{2, 1, 3}));
}

TEST(ExactRanks, MatchesSortOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> scores(10);
  for (auto& s : scores) s = u(rng);
  std::vector<int> ids{40, 41, 42, 43, 44, 45, 46, 47, 48, 49};
  auto ranks = exact_ranks(scores, ids);
  std::vector<int> order(10);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] > scores[b]; });
  for (int r = 0; r < 10; ++r) EXPECT_EQ(ranks[order[r]], r + 1);
}

TEST(ExactRanks, RejectsNaN) {
  std::vector<double> scores{0.1, std::numeric_limits<double>::quiet_NaN()};
  std::vector<int> ids{0, 1};
  EXPECT_THROW(exact_ranks(scores, ids), std::invalid_argument);
}

TEST(Ndcg, Examples) {
  auto perfect = list_with_positives({1, 2}, 5);
  EXPECT_DOUBLE_EQ(ndcg(perfect.ranks, perfect.labels), 1.0);
  auto l = list_with_positives({1, 3}, 5);
  EXPECT_NEAR(ndcg(l.ranks, l.labels), 0.91972, 1e-5);
  EXPECT_NEAR(ndcg(l.ranks, l.labels),
              (1.0 + 1.0 / std::log2(4.0)) / (1.0 + 1.0 / std::log2(3.0)),
              1e-15);
  auto single = list_with_positives({4}, 6);
  EXPECT_NEAR(ndcg(single.ranks, single.labels), 0.43068, 1e-5);
}

TEST(AveragePrecision, Examples) {
  auto l = list_with_positives({1, 3}, 5);
  EXPECT_NEAR(average_precision(l.ranks, l.labels), 0.83333, 1e-5);
  auto perfect = list_with_positives({1, 2, 3}, 7);
  EXPECT_DOUBLE_EQ(average_precision(perfect.ranks, perfect.labels), 1.0);
  auto l2 = list_with_positives({2, 5}, 6);
  EXPECT_NEAR(average_precision(l2.ranks, l2.labels), 0.45, 1e-15);
}

TEST(ReciprocalRank, Examples) {
  auto top = list_with_positives({1, 4}, 5);
  EXPECT_DOUBLE_EQ(reciprocal_rank(top.ranks, top.labels), 1.0);
  auto second = list_with_positives({2}, 5);
  EXPECT_DOUBLE_EQ(reciprocal_rank(second.ranks, second.labels), 0.5);
  auto l = list_with_positives({4, 7}, 9);
  EXPECT_DOUBLE_EQ(reciprocal_rank(l.ranks, l.labels), 0.25);
}

TEST(Rbp, Examples) {
  auto l = list_with_positives({1, 2}, 4);
  EXPECT_NEAR(rbp(l.ranks, l.labels, 0.5), 0.75, 1e-15);
  auto single = list_with_positives({1}, 3);
  EXPECT_NEAR(rbp(single.ranks, single.labels, 0.8), 0.2, 1e-15);
  auto deep = list_with_positives({2000}, 2000);
  EXPECT_LT(rbp(deep.ranks, deep.labels, 0.8), 1e-100);
}

TEST(Rbp, RejectsPersistenceOutsideUnitInterval) {
  auto l = list_with_positives({1}, 2);
  EXPECT_THROW(rbp(l.ranks, l.labels, 0.0), std::invalid_argument);
  EXPECT_THROW(rbp(l.ranks, l.labels, 1.0), std::invalid_argument);
  EXPECT_THROW(nrbp(l.ranks, l.labels, 1.5), std::invalid_argument);
}

TEST(Nrbp, Examples) {
  auto perfect = list_with_positives({1, 2}, 4);
  EXPECT_NEAR(nrbp(perfect.ranks, perfect.labels, 0.5), 1.0, 1e-15);
  auto second = list_with_positives({2}, 4);
  EXPECT_NEAR(nrbp(second.ranks, second.labels, 0.8), 0.8, 1e-15);
  auto l = list_with_positives({1, 3}, 5);
  EXPECT_NEAR(nrbp(l.ranks, l.labels, 0.9), 0.95263, 1e-5);
  EXPECT_NEAR(nrbp(l.ranks, l.labels, 0.9), (0.1 * 1.81) / (0.1 * 1.9), 1e-14);
}

TEST(Nrbp, Normalizer) {
  EXPECT_DOUBLE_EQ(nrbp_normalizer(0.5, 1), 2.0);
  EXPECT_NEAR(nrbp_normalizer(0.9, 2), 1.0 / 0.19, 1e-14);
}

TEST(Metrics, MatchBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 300; ++t) {
    auto inst = oracle::random_instance(rng, 12);
    EXPECT_NEAR(reciprocal_rank(inst.ranks, inst.labels),
                oracle::metric(oracle::Family::kRR, inst), 1e-12);
    EXPECT_NEAR(average_precision(inst.ranks, inst.labels),
                oracle::metric(oracle::Family::kAP, inst), 1e-12);
    EXPECT_NEAR(ndcg(inst.ranks, inst.labels),
                oracle::metric(oracle::Family::kNDCG, inst), 1e-12);
    for (double p : {0.5, 0.8, 0.9, 0.95}) {
      EXPECT_NEAR(rbp(inst.ranks, inst.labels, p),
                  oracle::metric(oracle::Family::kRBP, inst, p), 1e-12);
      EXPECT_NEAR(nrbp(inst.ranks, inst.labels, p),
                  oracle::metric(oracle::Family::kNRBP, inst, p), 1e-12);
    }
  }
}

TEST(Metrics, PerfectRankingScoresOne) {
  for (int m = 1; m <= 6; ++m) {
    std::vector<int> pos(m);
    std::iota(pos.begin(), pos.end(), 1);
    auto l = list_with_positives(pos, 10);
    for (const auto& kind : protocol_metrics()) {
      EXPECT_NEAR(evaluate_user(l, kind), 1.0, 1e-14) << kind.name();
    }
  }
}

TEST(Metrics, ValuesLieInUnitInterval) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    auto inst = oracle::random_instance(rng, 15);
    auto l = RankedUserList::from_ranks(inst.ranks, inst.labels);
    for (const auto& kind : protocol_metrics()) {
      const double v = evaluate_user(l, kind);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-15);
    }
  }
}

TEST(MetricKind, NamesRoundTrip) {
  for (const auto& kind : protocol_metrics()) {
    EXPECT_EQ(MetricKind::parse(kind.name()), kind);
  }
  EXPECT_EQ(MetricKind::parse("nrbp@0.9"), MetricKind::nrbp(0.9));
  EXPECT_EQ(MetricKind::nrbp(0.95).name(), "NRBP@0.95");
  EXPECT_THROW(MetricKind::parse("MAP@10"), std::invalid_argument);
  EXPECT_EQ(protocol_metrics().size(), 6u);
}

TEST(RankedUserList, FromScoresDerivesRanks) {
  auto l = RankedUserList::from_scores({0.2, 0.9, 0.4}, {1, 0, 1}, {0, 1, 2});
  EXPECT_EQ(l.ranks, (std::vector<int>{3, 1, 2}));
  EXPECT_EQ(l.num_positives(), 2);
}

// Two users, one-dimensional factors. User 0 ranks its positive second
// (RR 0.5); user 1 ranks its positive first (RR 1).
struct TwoUserFixture {
  FactorModel model;
  SplitAssignment split;
  TwoUserFixture() {
    model.n_users = 2;
    model.n_items = 4;
    model.dim = 1;
    model.user_factors = {1.0, 1.0};
    model.item_factors = {0.4, 0.3, 0.2, 0.1};
    split.users.resize(2);
    split.users[0].test_pos = {1};
    split.users[0].test_neg = {0, 2};
    split.users[1].test_pos = {0};
    split.users[1].test_neg = {3};
  }
};

TEST(EvaluateAll, AveragesUsersWithoutWeighting) {
  TwoUserFixture f;
  auto report = evaluate_all(f.model, f.split, {MetricKind::rr()});
  EXPECT_EQ(report.evaluated_users, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(report.per_user[0][0], 0.5);
  EXPECT_DOUBLE_EQ(report.per_user[0][1], 1.0);
  EXPECT_DOUBLE_EQ(report.value(MetricKind::rr()), 0.75);
}

TEST(EvaluateAll, SingleUserAggregateEqualsUserValue) {
  TwoUserFixture f;
  f.split.users[1].test_pos.clear();
  f.split.users[1].test_neg.clear();
  auto report = evaluate_all(f.model, f.split, {MetricKind::ap()});
  EXPECT_EQ(report.excluded_users, (std::vector<int>{1}));
  EXPECT_DOUBLE_EQ(report.value(MetricKind::ap()), 0.5);
}

TEST(EvaluateAll, SixProtocolMetrics) {
  TwoUserFixture f;
  auto report = evaluate_all(f.model, f.split, protocol_metrics());
  EXPECT_EQ(report.aggregate.size(), 6u);
  EXPECT_THROW(report.value(MetricKind::rbp(0.5)), ContractViolation);
}

TEST(EvalReport, WritesAllRows) {
  TwoUserFixture f;
  auto report = evaluate_all(f.model, f.split, {MetricKind::rr()});
  std::ostringstream out;
  write_eval_report(out, report);
  EXPECT_EQ(out.str(),
            "user,metric,p,value\n0,RR,0,0.5\n1,RR,0,1\nall,RR,0,0.75\n");
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(3.0), "3");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

}  // namespace
}  // namespace rankopt
