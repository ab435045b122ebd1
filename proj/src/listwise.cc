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

#include "rankopt/listwise.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rankopt/errors.h"

namespace rankopt {

namespace {

// s[i * n + j] = sigmoid(f_j - f_i): the soft indicator that j outranks i.
std::vector<double> pairwise_sigmoids(std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<double> s(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = sigmoid(scores[j] - scores[i]);
      s[i * n + j] = v;
      s[j * n + i] = 1.0 - v;
    }
  }
  return s;
}

// Pushes upstream gradients a_i = dL/dR~_i through the smoothed ranks:
//   dL/df_k = sum_{i != k} sigmoid'(f_i - f_k) (a_i - a_k).
void backprop_ranks(std::span<const double> upstream,
                    std::span<const double> sig, std::span<double> grad) {
  const std::size_t n = upstream.size();
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double s = sig[i * n + k];
      acc += s * (1.0 - s) * (upstream[i] - upstream[k]);
    }
    grad[k] += acc;
  }
}

int count_positives(std::span<const Label> labels) {
  const int m = static_cast<int>(std::count(labels.begin(), labels.end(), Label{1}));
  if (m == 0) throw std::invalid_argument("listwise loss needs a positive");
  return m;
}

}  // namespace

std::string list_loss_name(ListLossKind kind) {
  switch (kind) {
    case ListLossKind::kRR:
      return "RR";
    case ListLossKind::kAP:
      return "AP";
    case ListLossKind::kNDCG:
      return "NDCG";
    case ListLossKind::kNRBP:
      return "NRBP";
  }
  return "?";
}

ListLossKind parse_list_loss(const std::string& text) {
  std::string upper = text;
  for (auto& c : upper) c = static_cast<char>(std::toupper(c));
  if (upper == "RR") return ListLossKind::kRR;
  if (upper == "AP") return ListLossKind::kAP;
  if (upper == "NDCG") return ListLossKind::kNDCG;
  if (upper == "NRBP") return ListLossKind::kNRBP;
  throw std::invalid_argument("unknown listwise loss '" + text + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> smooth_ranks(std::span<const double> scores) {
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
  }
  const std::size_t n = scores.size();
  std::vector<double> ranks(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = sigmoid(scores[j] - scores[i]);
      ranks[i] += v;
      ranks[j] += 1.0 - v;
    }
  }
  return ranks;
}

SmoothedList SmoothedList::build(std::vector<double> scores,
                                 std::vector<Label> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  SmoothedList list;
  list.smoothed_ranks = smooth_ranks(scores);
  list.scores = std::move(scores);
  list.labels = std::move(labels);
  return list;
}

int SmoothedList::num_positives() const { return count_positives(labels); }

double loss_ndcg(const SmoothedList& list) {
  const double idcg = ideal_dcg(list.num_positives());
  double dcg = 0.0;
  for (std::size_t i = 0; i < list.scores.size(); ++i) {
    if (list.labels[i]) dcg += 1.0 / std::log2(list.smoothed_ranks[i] + 1.0);
  }
  return -dcg / idcg;
}

// The "1 +" counts the item itself among the relevant items at or above it.
double loss_ap(const SmoothedList& list) {
  const int m = list.num_positives();
  const std::size_t n = list.scores.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!list.labels[i]) continue;
    double above = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && list.labels[j]) {
        above += sigmoid(list.scores[j] - list.scores[i]);
      }
    }
    sum += above / list.smoothed_ranks[i];
  }
  return -sum / m;
}

double loss_rr(const SmoothedList& list) {
  list.num_positives();
  const std::size_t n = list.scores.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!list.labels[i]) continue;
    double keep = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && list.labels[j]) {
        keep *= 1.0 - sigmoid(list.scores[j] - list.scores[i]);
      }
    }
    sum += keep / list.smoothed_ranks[i];
  }
  return -sum;
}

double loss_nrbp(const SmoothedList& list) {
  const int m = list.num_positives();
  double sum = 0.0;
  for (std::size_t i = 0; i < list.scores.size(); ++i) {
    if (list.labels[i]) sum += list.smoothed_ranks[i] - 1.0;
  }
  return sum - 0.5 * m * (m - 1.0);
}

double nrbp_rank_loss(std::span<const int> ranks,
                      std::span<const Label> labels) {
  const int m = count_positives(labels);
  double sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i]) sum += ranks[i] - 1.0;
  }
  return sum - 0.5 * m * (m - 1.0);
}

double list_loss(ListLossKind kind, const SmoothedList& list) {
  switch (kind) {
    case ListLossKind::kRR:
      return loss_rr(list);
    case ListLossKind::kAP:
      return loss_ap(list);
    case ListLossKind::kNDCG:
      return loss_ndcg(list);
    case ListLossKind::kNRBP:
      return loss_nrbp(list);
  }
  throw std::invalid_argument("unknown listwise loss");
}

namespace {

// Loss from precomputed smoothed ranks and pairwise sigmoids.
double loss_from(ListLossKind kind, std::span<const Label> labels,
                 std::span<const double> ranks, std::span<const double> sig) {
  const int m = count_positives(labels);
  const std::size_t n = labels.size();
  double sum = 0.0;
  switch (kind) {
    case ListLossKind::kNRBP:
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i]) sum += ranks[i] - 1.0;
      }
      return sum - 0.5 * m * (m - 1.0);
    case ListLossKind::kNDCG:
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i]) sum += 1.0 / std::log2(ranks[i] + 1.0);
      }
      return -sum / ideal_dcg(m);
    case ListLossKind::kAP:
      for (std::size_t i = 0; i < n; ++i) {
        if (!labels[i]) continue;
        double above = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && labels[j]) above += sig[i * n + j];
        }
        sum += above / ranks[i];
      }
      return -sum / m;
    case ListLossKind::kRR:
      for (std::size_t i = 0; i < n; ++i) {
        if (!labels[i]) continue;
        double keep = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && labels[j]) keep *= 1.0 - sig[i * n + j];
        }
        sum += keep / ranks[i];
      }
      return -sum;
  }
  throw std::invalid_argument("unknown listwise loss");
}

std::vector<double> gradient_from(ListLossKind kind,
                                  std::span<const Label> labels,
                                  std::span<const double> ranks,
                                  std::span<const double> sig) {
  const int m = count_positives(labels);
  const std::size_t n = labels.size();
  std::vector<double> upstream(n, 0.0);
  std::vector<double> grad(n, 0.0);

  switch (kind) {
    case ListLossKind::kNRBP:
      for (std::size_t i = 0; i < n; ++i) upstream[i] = labels[i] ? 1.0 : 0.0;
      break;

    case ListLossKind::kNDCG: {
      const double idcg = ideal_dcg(m);
      for (std::size_t i = 0; i < n; ++i) {
        if (!labels[i]) continue;
        const double ln = std::log(ranks[i] + 1.0);
        upstream[i] = std::numbers::ln2 / (idcg * (ranks[i] + 1.0) * ln * ln);
      }
      break;
    }

    case ListLossKind::kAP: {
      // L = -(1/m) sum_i C_i / R~_i with C_i = 1 + sum_{j pos} s_ij.
      std::vector<double> via_count(n, 0.0);  // dL/dC_i
      for (std::size_t i = 0; i < n; ++i) {
        if (!labels[i]) continue;
        double count = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && labels[j]) count += sig[i * n + j];
        }
        upstream[i] = count / (m * ranks[i] * ranks[i]);
        via_count[i] = -1.0 / (m * ranks[i]);
      }
      for (std::size_t k = 0; k < n; ++k) {
        if (!labels[k]) continue;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == k || !labels[i]) continue;
          const double s = sig[i * n + k];
          acc += s * (1.0 - s) * (via_count[i] - via_count[k]);
        }
        grad[k] += acc;
      }
      break;
    }

    case ListLossKind::kRR: {
      // L = -sum_i P_i / R~_i with P_i = prod_{j pos} (1 - s_ij), and
      // d ln(1 - s_ij) / d f_i = s_ij, d ln(1 - s_ij) / d f_j = -s_ij.
      std::vector<double> keep(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!labels[i]) continue;
        double prod = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && labels[j]) prod *= 1.0 - sig[i * n + j];
        }
        keep[i] = prod;
        upstream[i] = prod / (ranks[i] * ranks[i]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!labels[i]) continue;
        const double scale = -keep[i] / ranks[i];  // dL/dP_i * P_i
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || !labels[j]) continue;
          const double s = sig[i * n + j];
          grad[i] += scale * s;
          grad[j] -= scale * s;
        }
      }
      break;
    }
  }
  backprop_ranks(upstream, sig, grad);
  return grad;
}

}  // namespace

std::vector<double> loss_gradients(ListLossKind kind, const SmoothedList& list) {
  const auto sig = pairwise_sigmoids(list.scores);
  return gradient_from(kind, list.labels, list.smoothed_ranks, sig);
}

LossAndGradient list_loss_and_gradients(ListLossKind kind,
                                        std::span<const double> scores,
                                        std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
  }
  const std::size_t n = scores.size();
  const auto sig = pairwise_sigmoids(scores);
  std::vector<double> ranks(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ranks[i] += sig[i * n + j];
  }
  LossAndGradient out;
  out.loss = loss_from(kind, labels, ranks, sig);
  out.grad = gradient_from(kind, labels, ranks, sig);
  return out;
}

EpochDiagnostics train_epoch_listwise(FactorModel& model,
                                      const SplitAssignment& split,
                                      ListLossKind kind, const SgdConfig& cfg,
                                      int epoch) {
  EpochDiagnostics diag;
  diag.epoch = epoch;
  std::vector<int> items;
  std::vector<Label> labels;
  double loss_sum = 0.0;
  double grad_sq = 0.0;
  int users = 0;
  for (int u : epoch_user_order(static_cast<int>(split.users.size()), cfg.seed,
                                epoch)) {
    const auto& us = split.users[u];
    if (us.train_pos.empty()) continue;
    items.assign(us.train_pos.begin(), us.train_pos.end());
    items.insert(items.end(), us.train_neg.begin(), us.train_neg.end());
    labels.assign(us.train_pos.size(), 1);
    labels.resize(items.size(), 0);
    const auto scores = predict_scores(model, u, items);
    if (!std::all_of(scores.begin(), scores.end(),
                     [](double s) { return std::isfinite(s); })) {
      throw TrainingError("non-finite score at epoch " + std::to_string(epoch) +
                              ", user " + std::to_string(u),
                          epoch, u);
    }
    auto [loss, grad] = list_loss_and_gradients(kind, scores, labels);
    for (auto& g : grad) {
      grad_sq += g * g;
      g = -g;  // descent on the loss is ascent along -grad
    }
    if (!std::isfinite(loss) || !std::isfinite(grad_sq)) {
      throw TrainingError("non-finite loss or gradient at epoch " +
                              std::to_string(epoch) + ", user " +
                              std::to_string(u),
                          epoch, u);
    }
    loss_sum += loss;
    ++users;
    try {
      apply_score_gradients(model, u, items, grad, cfg);
    } catch (const TrainingError& e) {
      throw TrainingError(std::string(e.what()) + " at epoch " +
                              std::to_string(epoch),
                          epoch, u);
    }
  }
  diag.mean_value = users > 0 ? loss_sum / users : 0.0;
  diag.grad_norm = std::sqrt(grad_sq);
  return diag;
}

}  // namespace rankopt
