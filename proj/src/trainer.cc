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

#include "rankopt/trainer.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rankopt/errors.h"

namespace rankopt {

namespace {

std::string to_upper(std::string text) {
  for (auto& c : text) c = static_cast<char>(std::toupper(c));
  return text;
}

bool model_is_finite(const FactorModel& model) {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(model.user_factors.begin(), model.user_factors.end(), finite) &&
         std::all_of(model.item_factors.begin(), model.item_factors.end(), finite);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

std::string paradigm_name(Paradigm p) {
  return p == Paradigm::kPairwise ? "pairwise" : "listwise";
}

Paradigm parse_paradigm(const std::string& text) {
  const auto lower = to_upper(text);
  if (lower == "PAIRWISE") return Paradigm::kPairwise;
  if (lower == "LISTWISE") return Paradigm::kListwise;
  throw std::invalid_argument("unknown paradigm '" + text + "'");
}

std::string LossSpec::name() const {
  switch (family) {
    case MetricFamily::kRR:
      return "RR";
    case MetricFamily::kAP:
      return "AP";
    case MetricFamily::kNDCG:
      return "NDCG";
    case MetricFamily::kNRBP:
      return p ? "NRBP@" + format_double(*p) : "NRBP";
    case MetricFamily::kRBP:
      break;
  }
  throw std::invalid_argument("RBP is not a training loss; use NRBP");
}

LossSpec LossSpec::parse(const std::string& text) {
  const auto upper = to_upper(text);
  if (upper == "NRBP") return {MetricFamily::kNRBP, std::nullopt};
  const auto kind = MetricKind::parse(text);
  if (kind.family == MetricFamily::kRBP) {
    throw std::invalid_argument("RBP is not a training loss; use NRBP");
  }
  LossSpec spec{kind.family, std::nullopt};
  if (kind.family == MetricFamily::kNRBP) spec.p = kind.p;
  return spec;
}

void LossSpec::validate(Paradigm paradigm) const {
  if (family == MetricFamily::kRBP) {
    throw std::invalid_argument("RBP is not a training loss; use NRBP");
  }
  if (family != MetricFamily::kNRBP && p) {
    throw std::invalid_argument(name() + " takes no persistence");
  }
  if (family == MetricFamily::kNRBP) {
    if (paradigm == Paradigm::kPairwise && !p) {
      throw std::invalid_argument("pairwise NRBP needs a persistence p");
    }
    if (paradigm == Paradigm::kListwise && p) {
      throw std::invalid_argument(
          "listwise NRBP is persistence-free; drop p at training time");
    }
    if (p && !(*p > 0.0 && *p < 1.0)) {
      throw std::invalid_argument("persistence p must lie in (0, 1)");
    }
  }
}

MetricKind LossSpec::pairwise_metric() const {
  validate(Paradigm::kPairwise);
  return {family, p.value_or(0.0)};
}

ListLossKind LossSpec::listwise_kind() const {
  validate(Paradigm::kListwise);
  switch (family) {
    case MetricFamily::kRR:
      return ListLossKind::kRR;
    case MetricFamily::kAP:
      return ListLossKind::kAP;
    case MetricFamily::kNDCG:
      return ListLossKind::kNDCG;
    default:
      return ListLossKind::kNRBP;
  }
}

std::vector<MetricKind> LossSpec::target_metrics() const {
  if (family == MetricFamily::kNRBP && !p) {
    std::vector<MetricKind> out;
    for (double q : protocol_persistences()) out.push_back(MetricKind::nrbp(q));
    return out;
  }
  return {MetricKind{family, p.value_or(0.0)}};
}

const std::vector<LossSpec>& pairwise_protocol_losses() {
  static const std::vector<LossSpec> losses = {
      {MetricFamily::kRR, std::nullopt},  {MetricFamily::kAP, std::nullopt},
      {MetricFamily::kNDCG, std::nullopt}, {MetricFamily::kNRBP, 0.8},
      {MetricFamily::kNRBP, 0.9},          {MetricFamily::kNRBP, 0.95}};
  return losses;
}

const std::vector<LossSpec>& listwise_protocol_losses() {
  static const std::vector<LossSpec> losses = {
      {MetricFamily::kRR, std::nullopt},
      {MetricFamily::kAP, std::nullopt},
      {MetricFamily::kNDCG, std::nullopt},
      {MetricFamily::kNRBP, std::nullopt}};
  return losses;
}

const std::vector<double>& pairwise_lr_grid() {
  static const std::vector<double> grid = {0.001, 0.01, 0.1};
  return grid;
}

const std::vector<double>& listwise_lr_grid() {
  static const std::vector<double> grid = {0.001, 0.01, 0.1, 1.0, 3.0, 10.0};
  return grid;
}

void TrainConfig::validate() const {
  loss.validate(paradigm);
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (dim < 1) throw std::invalid_argument("latent dimension must be >= 1");
  if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be non-negative");
}

TrainHistory train(const TrainConfig& config, const SplitAssignment& split,
                   const InteractionSet& set,
                   const std::vector<MetricKind>& metrics) {
  config.validate();
  if (static_cast<int>(split.users.size()) != set.n_users) {
    throw ContractViolation("split and interaction set disagree on users");
  }
  TrainHistory history;
  history.metrics = metrics;

  FactorModel model =
      init_model(set.n_users, set.n_items, config.dim, config.seed, config.init_std);
  const SgdConfig sgd{config.learning_rate, config.l2, config.seed,
                      config.init_std};

  std::vector<double> best(metrics.size(), -1.0);
  auto record = [&](int epoch) {
    const auto report = evaluate_all(model, split, metrics);
    std::vector<double> row;
    row.reserve(metrics.size());
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      const double v = report.value(metrics[k]);
      row.push_back(v);
      if (config.keep_best_models && v > best[k]) {
        best[k] = v;
        history.best_models.insert_or_assign(metrics[k], model);
      }
    }
    history.evaluated_epochs.push_back(epoch);
    history.aggregates.push_back(std::move(row));
  };

  record(0);
  const MetricKind pair_metric = config.paradigm == Paradigm::kPairwise
                                     ? config.loss.pairwise_metric()
                                     : MetricKind{};
  const ListLossKind list_kind = config.paradigm == Paradigm::kListwise
                                     ? config.loss.listwise_kind()
                                     : ListLossKind::kNDCG;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    try {
      auto diag = config.paradigm == Paradigm::kPairwise
                      ? train_epoch_pairwise(model, split, pair_metric, sgd, epoch)
                      : train_epoch_listwise(model, split, list_kind, sgd, epoch);
      history.diagnostics.push_back(diag);
    } catch (const TrainingError& e) {
      history.diverged = true;
      history.failure = e.what();
      history.failed_epoch = epoch;
      break;
    }
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      if (!model_is_finite(model)) {
        history.diverged = true;
        history.failure = "non-finite model parameters at epoch " +
                          std::to_string(epoch);
        history.failed_epoch = epoch;
        break;
      }
      record(epoch);
    }
  }
  return history;
}

BestEpoch select_best(const TrainHistory& history, const MetricKind& metric) {
  auto it = std::find(history.metrics.begin(), history.metrics.end(), metric);
  if (it == history.metrics.end()) {
    throw ContractViolation("metric " + metric.name() + " not tracked in history");
  }
  if (history.evaluated_epochs.empty()) {
    throw ContractViolation("empty training history");
  }
  const auto k = static_cast<std::size_t>(it - history.metrics.begin());
  BestEpoch best{history.evaluated_epochs[0], history.aggregates[0][k]};
  for (std::size_t e = 1; e < history.evaluated_epochs.size(); ++e) {
    if (history.aggregates[e][k] > best.value) {
      best = {history.evaluated_epochs[e], history.aggregates[e][k]};
    }
  }
  return best;
}

std::vector<LrRun> train_lr_grid(const TrainConfig& base,
                                 const SplitAssignment& split,
                                 const InteractionSet& set,
                                 const std::vector<double>& grid,
                                 const std::vector<MetricKind>& metrics) {
  if (grid.empty()) throw std::invalid_argument("empty learning-rate grid");
  std::vector<LrRun> runs;
  runs.reserve(grid.size());
  for (double lr : grid) {
    TrainConfig cfg = base;
    cfg.learning_rate = lr;
    runs.push_back({lr, train(cfg, split, set, metrics)});
  }
  return runs;
}

int select_learning_rate(const std::vector<LrRun>& runs,
                         const MetricKind& metric) {
  int chosen = -1;
  double best_value = 0.0;
  for (int r = 0; r < static_cast<int>(runs.size()); ++r) {
    if (runs[r].history.diverged) continue;
    const double v = select_best(runs[r].history, metric).value;
    const bool better =
        chosen < 0 || v > best_value ||
        (v == best_value && runs[r].learning_rate < runs[chosen].learning_rate);
    if (better) {
      chosen = r;
      best_value = v;
    }
  }
  return chosen;
}

LrSearchResult lr_search(const TrainConfig& base, const SplitAssignment& split,
                         const InteractionSet& set,
                         const std::vector<double>& grid,
                         const MetricKind& target) {
  std::vector<MetricKind> metrics = protocol_metrics();
  if (std::find(metrics.begin(), metrics.end(), target) == metrics.end()) {
    metrics.push_back(target);
  }
  auto runs = train_lr_grid(base, split, set, grid, metrics);
  LrSearchResult result;
  result.best_config = base;
  const int chosen = select_learning_rate(runs, target);
  if (chosen < 0) {
    result.all_diverged = true;
    return result;
  }
  result.best_config.learning_rate = runs[chosen].learning_rate;
  result.best = select_best(runs[chosen].history, target);
  result.best_history = std::move(runs[chosen].history);
  return result;
}

void write_history(std::ostream& out, const TrainHistory& history) {
  out << "epoch,metric,p,value\n";
  for (std::size_t e = 0; e < history.evaluated_epochs.size(); ++e) {
    for (std::size_t k = 0; k < history.metrics.size(); ++k) {
      out << history.evaluated_epochs[e] << ',' << history.metrics[k].name()
          << ',' << format_double(history.metrics[k].p) << ','
          << format_double(history.aggregates[e][k]) << '\n';
    }
  }
  if (history.diverged) {
    std::string reason = history.failure;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    out << "#failed," << history.failed_epoch << ',' << reason << '\n';
  }
}

TrainHistory read_history(std::istream& in) {
  TrainHistory history;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "epoch,metric,p,value") {
        throw ParseError("unexpected history header", line_no);
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!f.empty() && f[0] == "#failed") {
      if (f.size() < 2) throw ParseError("malformed failure row", line_no);
      history.diverged = true;
      history.failed_epoch = std::stoi(f[1]);
      history.failure = f.size() > 2 ? f[2] : "";
      continue;
    }
    if (f.size() != 4) throw ParseError("malformed history row", line_no);
    int epoch = 0;
    MetricKind kind;
    double value = 0.0;
    try {
      epoch = std::stoi(f[0]);
      kind = MetricKind::parse(f[1]);
      value = parse_double(f[3]);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
    auto mit = std::find(history.metrics.begin(), history.metrics.end(), kind);
    if (mit == history.metrics.end()) {
      if (!history.evaluated_epochs.empty() &&
          history.evaluated_epochs.size() > 1) {
        throw ParseError("metric introduced after the first epoch", line_no);
      }
      history.metrics.push_back(kind);
      mit = history.metrics.end() - 1;
      for (auto& row : history.aggregates) row.resize(history.metrics.size(), 0.0);
    }
    if (history.evaluated_epochs.empty() ||
        history.evaluated_epochs.back() != epoch) {
      history.evaluated_epochs.push_back(epoch);
      history.aggregates.emplace_back(history.metrics.size(), 0.0);
    }
    history.aggregates.back()[mit - history.metrics.begin()] = value;
  }
  return history;
}

void write_training_log(std::ostream& out, const TrainHistory& history) {
  out << "epoch,mean_value,grad_norm,pair_count\n";
  for (const auto& d : history.diagnostics) {
    out << d.epoch << ',' << format_double(d.mean_value) << ','
        << format_double(d.grad_norm) << ',' << d.pair_count << '\n';
  }
}

}  // namespace rankopt
