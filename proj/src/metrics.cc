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

#include "rankopt/metrics.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "rankopt/dataio.h"
#include "rankopt/errors.h"
#include "rankopt/mf_model.h"

namespace rankopt {

namespace {

void check_persistence(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("persistence p must lie in (0, 1), got " +
                                format_double(p));
  }
}

void check_lengths(std::span<const int> ranks, std::span<const Label> labels) {
  if (ranks.size() != labels.size()) {
    throw std::invalid_argument("ranks and labels differ in length");
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string MetricKind::name() const {
  switch (family) {
    case MetricFamily::kRR:
      return "RR";
    case MetricFamily::kAP:
      return "AP";
    case MetricFamily::kNDCG:
      return "NDCG";
    case MetricFamily::kRBP:
      return "RBP@" + format_double(p);
    case MetricFamily::kNRBP:
      return "NRBP@" + format_double(p);
  }
  return "?";
}

MetricKind MetricKind::parse(const std::string& text) {
  std::string upper = text;
  for (auto& c : upper) c = static_cast<char>(std::toupper(c));
  if (upper == "RR") return rr();
  if (upper == "AP") return ap();
  if (upper == "NDCG") return ndcg();
  auto at = upper.find('@');
  if (at != std::string::npos) {
    std::string head = upper.substr(0, at);
    std::string tail = upper.substr(at + 1);
    double p = 0.0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), p);
    if (ec == std::errc() && ptr == tail.data() + tail.size()) {
      check_persistence(p);
      if (head == "RBP") return rbp(p);
      if (head == "NRBP") return nrbp(p);
    }
  }
  throw std::invalid_argument("unknown metric '" + text + "'");
}

const std::vector<double>& protocol_persistences() {
  static const std::vector<double> ps = {0.8, 0.9, 0.95};
  return ps;
}

const std::vector<MetricKind>& protocol_metrics() {
  static const std::vector<MetricKind> kinds = {
      MetricKind::rr(),        MetricKind::ap(),        MetricKind::ndcg(),
      MetricKind::nrbp(0.8),   MetricKind::nrbp(0.9),   MetricKind::nrbp(0.95)};
  return kinds;
}

std::vector<int> exact_ranks(std::span<const double> scores,
                             std::span<const int> item_ids) {
  if (scores.size() != item_ids.size()) {
    throw std::invalid_argument("scores and item ids differ in length");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
  }
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return item_ids[a] < item_ids[b];
  });
  std::vector<int> ranks(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    ranks[order[pos]] = static_cast<int>(pos) + 1;
  }
  return ranks;
}

RankedUserList RankedUserList::from_scores(std::vector<double> scores,
                                           std::vector<Label> labels,
                                           std::vector<int> item_ids) {
  if (labels.size() != scores.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  RankedUserList list;
  list.ranks = exact_ranks(scores, item_ids);
  list.scores = std::move(scores);
  list.labels = std::move(labels);
  list.item_ids = std::move(item_ids);
  return list;
}

RankedUserList RankedUserList::from_ranks(std::vector<int> ranks,
                                          std::vector<Label> labels) {
  check_lengths(ranks, labels);
  RankedUserList list;
  const auto n = ranks.size();
  list.scores.resize(n);
  list.item_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    list.scores[i] = -static_cast<double>(ranks[i]);
    list.item_ids[i] = static_cast<int>(i);
  }
  list.ranks = std::move(ranks);
  list.labels = std::move(labels);
  return list;
}

int RankedUserList::num_positives() const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), Label{1}));
}

double ideal_dcg(int num_positives) {
  double idcg = 0.0;
  for (int r = 1; r <= num_positives; ++r) idcg += 1.0 / std::log2(r + 1.0);
  return idcg;
}

double nrbp_normalizer(double p, int num_positives) {
  check_persistence(p);
  return 1.0 / (1.0 - std::pow(p, num_positives));
}

// Binary gains: 2^y - 1 collapses to y.
double ndcg(std::span<const int> ranks, std::span<const Label> labels) {
  check_lengths(ranks, labels);
  double dcg = 0.0;
  int m = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (!labels[i]) continue;
    dcg += 1.0 / std::log2(ranks[i] + 1.0);
    ++m;
  }
  if (m == 0) throw std::invalid_argument("nDCG needs at least one positive");
  return dcg / ideal_dcg(m);
}

double average_precision(std::span<const int> ranks,
                         std::span<const Label> labels) {
  check_lengths(ranks, labels);
  std::vector<int> pos_ranks;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i]) pos_ranks.push_back(ranks[i]);
  }
  if (pos_ranks.empty()) {
    throw std::invalid_argument("AP needs at least one positive");
  }
  std::sort(pos_ranks.begin(), pos_ranks.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < pos_ranks.size(); ++k) {
    sum += static_cast<double>(k + 1) / pos_ranks[k];
  }
  return sum / static_cast<double>(pos_ranks.size());
}

double reciprocal_rank(std::span<const int> ranks,
                       std::span<const Label> labels) {
  check_lengths(ranks, labels);
  int best = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i]) best = std::min(best, ranks[i]);
  }
  if (best == std::numeric_limits<int>::max()) {
    throw std::invalid_argument("RR needs at least one positive");
  }
  return 1.0 / best;
}

double rbp(std::span<const int> ranks, std::span<const Label> labels,
           double p) {
  check_persistence(p);
  check_lengths(ranks, labels);
  double sum = 0.0;
  int m = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (!labels[i]) continue;
    sum += std::pow(p, ranks[i] - 1);
    ++m;
  }
  if (m == 0) throw std::invalid_argument("RBP needs at least one positive");
  return (1.0 - p) * sum;
}

double nrbp(std::span<const int> ranks, std::span<const Label> labels,
            double p) {
  check_persistence(p);
  check_lengths(ranks, labels);
  double sum = 0.0;
  int m = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (!labels[i]) continue;
    sum += std::pow(p, ranks[i] - 1);
    ++m;
  }
  if (m == 0) throw std::invalid_argument("nRBP needs at least one positive");
  return nrbp_normalizer(p, m) * (1.0 - p) * sum;
}

double evaluate(std::span<const int> ranks, std::span<const Label> labels,
                const MetricKind& kind) {
  switch (kind.family) {
    case MetricFamily::kRR:
      return reciprocal_rank(ranks, labels);
    case MetricFamily::kAP:
      return average_precision(ranks, labels);
    case MetricFamily::kNDCG:
      return ndcg(ranks, labels);
    case MetricFamily::kRBP:
      return rbp(ranks, labels, kind.p);
    case MetricFamily::kNRBP:
      return nrbp(ranks, labels, kind.p);
  }
  throw std::invalid_argument("unknown metric family");
}

double evaluate_user(const RankedUserList& list, const MetricKind& kind) {
  return evaluate(list.ranks, list.labels, kind);
}

double EvalReport::value(const MetricKind& kind) const {
  auto it = aggregate.find(kind);
  if (it == aggregate.end()) {
    throw ContractViolation("metric " + kind.name() + " absent from report");
  }
  return it->second;
}

EvalReport evaluate_all(const FactorModel& model, const SplitAssignment& split,
                        const std::vector<MetricKind>& kinds) {
  EvalReport report;
  report.kinds = kinds;
  report.per_user.resize(kinds.size());
  std::vector<int> items;
  std::vector<Label> labels;
  for (int u = 0; u < static_cast<int>(split.users.size()); ++u) {
    const auto& us = split.users[u];
    if (us.test_pos.empty()) {
      report.excluded_users.push_back(u);
      continue;
    }
    items.assign(us.test_pos.begin(), us.test_pos.end());
    items.insert(items.end(), us.test_neg.begin(), us.test_neg.end());
    labels.assign(us.test_pos.size(), 1);
    labels.resize(items.size(), 0);
    auto scores = predict_scores(model, u, items);
    auto ranks = exact_ranks(scores, items);
    report.evaluated_users.push_back(u);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      report.per_user[k].push_back(evaluate(ranks, labels, kinds[k]));
    }
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const auto& vals = report.per_user[k];
    double mean = vals.empty()
                      ? 0.0
                      : std::accumulate(vals.begin(), vals.end(), 0.0) /
                            static_cast<double>(vals.size());
    report.aggregate[kinds[k]] = mean;
  }
  return report;
}

void write_eval_report(std::ostream& out, const EvalReport& report) {
  out << "user,metric,p,value\n";
  for (std::size_t k = 0; k < report.kinds.size(); ++k) {
    const auto& kind = report.kinds[k];
    for (std::size_t u = 0; u < report.evaluated_users.size(); ++u) {
      out << report.evaluated_users[u] << ',' << kind.name() << ','
          << format_double(kind.p) << ',' << format_double(report.per_user[k][u])
          << '\n';
    }
  }
  for (const auto& kind : report.kinds) {
    out << "all," << kind.name() << ',' << format_double(kind.p) << ','
        << format_double(report.value(kind)) << '\n';
  }
}

}  // namespace rankopt
