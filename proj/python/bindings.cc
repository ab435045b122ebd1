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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rankopt/errors.h"
#include "rankopt/experiment.h"
#include "rankopt/listwise.h"
#include "rankopt/pairwise.h"

namespace py = pybind11;
using namespace rankopt;

namespace {

using Ranks = std::vector<int>;
using Labels = std::vector<Label>;

py::dict history_to_dict(const TrainHistory& h) {
  py::list metrics;
  for (const auto& m : h.metrics) metrics.append(m.name());
  py::list losses;
  for (const auto& d : h.diagnostics) losses.append(d.mean_value);
  py::dict out;
  out["epochs"] = h.evaluated_epochs;
  out["metrics"] = metrics;
  out["values"] = h.aggregates;
  out["epoch_mean_loss"] = losses;
  out["diverged"] = h.diverged;
  out["failure"] = h.failure;
  return out;
}

}  // namespace

PYBIND11_MODULE(_rankopt, m) {
  m.doc() = "Ranking metrics, LambdaRank and smoothed-rank listwise training";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<ContractViolation>(m, "ContractViolation",
                                            PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  // Metrics take per-item ranks (a permutation of 1..N) and 0/1 labels.
  m.def("ndcg", [](const Ranks& r, const Labels& y) { return ndcg(r, y); },
        py::arg("ranks"), py::arg("labels"));
  m.def("average_precision",
        [](const Ranks& r, const Labels& y) { return average_precision(r, y); },
        py::arg("ranks"), py::arg("labels"));
  m.def("reciprocal_rank",
        [](const Ranks& r, const Labels& y) { return reciprocal_rank(r, y); },
        py::arg("ranks"), py::arg("labels"));
  m.def("rbp",
        [](const Ranks& r, const Labels& y, double p) { return rbp(r, y, p); },
        py::arg("ranks"), py::arg("labels"), py::arg("p"));
  m.def("nrbp",
        [](const Ranks& r, const Labels& y, double p) { return nrbp(r, y, p); },
        py::arg("ranks"), py::arg("labels"), py::arg("p"));
  m.def("evaluate",
        [](const Ranks& r, const Labels& y, const std::string& metric) {
          return evaluate(r, y, MetricKind::parse(metric));
        },
        py::arg("ranks"), py::arg("labels"), py::arg("metric"),
        "Evaluate a metric given by name, e.g. 'AP' or 'NRBP@0.9'.");
  m.def("exact_ranks",
        [](const std::vector<double>& scores, std::vector<int> ids) {
          if (ids.empty()) {
            ids.resize(scores.size());
            for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
          }
          return exact_ranks(scores, ids);
        },
        py::arg("scores"), py::arg("item_ids") = std::vector<int>{});
  m.def("protocol_metrics", [] {
    std::vector<std::string> names;
    for (const auto& k : protocol_metrics()) names.push_back(k.name());
    return names;
  });

  m.def("swap_delta",
        [](const std::string& metric, const Ranks& r, const Labels& y, int i,
           int j) { return swap_delta(MetricKind::parse(metric), r, y, i, j); },
        py::arg("metric"), py::arg("ranks"), py::arg("labels"), py::arg("i"),
        py::arg("j"));
  m.def("pair_cost", &pair_cost, py::arg("sign"), py::arg("score_diff"));
  m.def("cost_derivative", &cost_derivative, py::arg("sign"),
        py::arg("score_diff"));
  m.def("lambdas",
        [](const std::string& metric, const std::vector<double>& scores,
           const Labels& y) {
          std::vector<int> ids(scores.size());
          for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
          const auto ranks = exact_ranks(scores, ids);
          std::vector<double> out(scores.size(), 0.0);
          accumulate_lambdas(MetricKind::parse(metric), scores, ranks, y, out);
          return out;
        },
        py::arg("metric"), py::arg("scores"), py::arg("labels"),
        "Per-item LambdaRank ascent gradients for one list.");

  m.def("smooth_ranks",
        [](const std::vector<double>& scores) { return smooth_ranks(scores); },
        py::arg("scores"));
  m.def("list_loss",
        [](const std::string& kind, const std::vector<double>& scores,
           const Labels& y) {
          auto r = list_loss_and_gradients(parse_list_loss(kind), scores, y);
          return py::make_tuple(r.loss, r.grad);
        },
        py::arg("kind"), py::arg("scores"), py::arg("labels"),
        "Smoothed listwise loss and its gradient: (loss, grad).");

  py::class_<InteractionSet>(m, "InteractionSet")
      .def_readonly("n_users", &InteractionSet::n_users)
      .def_readonly("n_items", &InteractionSet::n_items)
      .def_readonly("positives", &InteractionSet::positives)
      .def("num_ratings", &InteractionSet::num_ratings);
  m.def("generate_synthetic", &generate_synthetic, py::arg("n_users"),
        py::arg("n_items"), py::arg("latent_dim"), py::arg("positives_per_user"),
        py::arg("seed"));
  m.def("load_dataset",
        [](const std::string& path, const std::string& format, int threshold,
           int min_positives) {
          DatasetSource src;
          src.path = path;
          src.format = format == "graded" ? RatingFormat::kGraded
                                          : RatingFormat::kUnary;
          src.positive_threshold = threshold;
          src.min_positives = min_positives;
          return src.load();
        },
        py::arg("path"), py::arg("format") = "unary", py::arg("threshold") = 4,
        py::arg("min_positives") = 25);

  py::class_<UserSplit>(m, "UserSplit")
      .def_readonly("train_pos", &UserSplit::train_pos)
      .def_readonly("test_pos", &UserSplit::test_pos)
      .def_readonly("train_neg", &UserSplit::train_neg)
      .def_readonly("test_neg", &UserSplit::test_neg)
      .def_readonly("pool_exhausted", &UserSplit::pool_exhausted);
  py::class_<SplitAssignment>(m, "SplitAssignment")
      .def_readonly("split_id", &SplitAssignment::split_id)
      .def_readonly("nsr", &SplitAssignment::nsr)
      .def_readonly("users", &SplitAssignment::users);
  m.def("make_split",
        [](const InteractionSet& set, int split_id, double nsr,
           std::uint64_t seed) {
          return sample_negatives(split_train_test(set, split_id, seed), set,
                                  nsr, seed);
        },
        py::arg("dataset"), py::arg("split_id"), py::arg("nsr"),
        py::arg("seed"));

  m.def("train",
        [](const InteractionSet& set, const SplitAssignment& split,
           const std::string& paradigm, const std::string& loss, double lr,
           int epochs, int eval_every, std::uint64_t seed, int dim,
           double init_std) {
          TrainConfig cfg;
          cfg.paradigm = parse_paradigm(paradigm);
          cfg.loss = LossSpec::parse(loss);
          cfg.learning_rate = lr;
          cfg.epochs = epochs;
          cfg.eval_every = eval_every;
          cfg.seed = seed;
          cfg.nsr = split.nsr;
          cfg.dim = dim;
          cfg.init_std = init_std;
          cfg.validate();
          TrainHistory h;
          {
            py::gil_scoped_release release;
            h = train(cfg, split, set);
          }
          return history_to_dict(h);
        },
        py::arg("dataset"), py::arg("split"), py::arg("paradigm"),
        py::arg("loss"), py::arg("lr"), py::arg("epochs") = 100,
        py::arg("eval_every") = 10, py::arg("seed") = 0,
        py::arg("dim") = kDefaultLatentDim,
        py::arg("init_std") = kDefaultInitStd,
        "Train one model; returns the evaluation history as a dict.");
}
