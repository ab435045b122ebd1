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

// rankopt: command-line front end for data preparation, training, grid runs
// and result analysis. Every output file is a deterministic function of the
// inputs and flags; manifests carry no timestamps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rankopt/errors.h"
#include "rankopt/experiment.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rankopt;

namespace {

constexpr const char* kVersion = "1.0.0";

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_integral_v<T>) {
      value = static_cast<T>(std::stoll(item, &used));
    } else {
      value = std::stod(item, &used);
    }
    if (used != item.size()) {
      throw std::invalid_argument("bad list entry '" + item + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
  return out;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_manifest(const fs::path& dir, const std::string& command,
                    json arguments, json extra = json::object()) {
  json m = {{"tool", "rankopt"},
            {"version", kVersion},
            {"command", command},
            {"arguments", std::move(arguments)}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_file(dir / "manifest.json", [&](std::ostream& out) {
    out << m.dump(2) << '\n';
  });
}

RatingFormat parse_format(const std::string& text) {
  if (text == "unary") return RatingFormat::kUnary;
  if (text == "graded") return RatingFormat::kGraded;
  throw std::invalid_argument("--format must be unary or graded");
}

std::string split_file_name(int split_id, double nsr) {
  return "split" + std::to_string(split_id) + "_nsr" + format_double(nsr) + ".csv";
}

// Options shared by commands that read a dataset.
struct DatasetOptions {
  std::string path;
  std::string format = "unary";
  int threshold = 4;
  int min_positives = 25;

  void add(CLI::App* cmd) {
    cmd->add_option("--dataset", path,
                    "Ratings file (user<TAB>item[<TAB>rating]) or prepared "
                    "dataset directory")
        ->required();
    cmd->add_option("--format", format, "unary or graded")
        ->check(CLI::IsMember({"unary", "graded"}));
    cmd->add_option("--threshold", threshold,
                    "Graded ratings at or above this are positives");
    cmd->add_option("--min-positives", min_positives,
                    "Drop users with fewer positives");
  }
  DatasetSource source() const {
    DatasetSource src;
    src.name = fs::path(path).filename().string();
    if (src.name.empty()) src.name = fs::path(path).parent_path().filename().string();
    src.path = path;
    src.format = parse_format(format);
    src.positive_threshold = threshold;
    src.min_positives = min_positives;
    return src;
  }
  json to_json() const {
    return {{"dataset", path},
            {"format", format},
            {"threshold", threshold},
            {"min_positives", min_positives}};
  }
};

// ---------------------------------------------------------------- prepare

struct PrepareOptions {
  DatasetOptions data;
  std::string splits = "0,1,2";
  std::string nsr = "1,2,5";
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_prepare(const PrepareOptions& o) {
  const auto src = o.data.source();
  const auto set = src.load();
  const fs::path out(o.out_dir);
  save_prepared_dataset(out.string(), src.name, set);
  json split_info = json::array();
  for (int split_id : parse_list<int>(o.splits)) {
    const auto partial = split_train_test(set, split_id, o.seed);
    for (double nsr : parse_list<double>(o.nsr)) {
      const auto split = sample_negatives(partial, set, nsr, o.seed);
      int exhausted = 0;
      for (const auto& us : split.users) exhausted += us.pool_exhausted;
      const auto name = split_file_name(split_id, nsr);
      write_file(out / "splits" / name,
                 [&](std::ostream& os) { write_split(os, split); });
      split_info.push_back({{"file", "splits/" + name},
                            {"split_id", split_id},
                            {"nsr", nsr},
                            {"pool_exhausted_users", exhausted}});
    }
  }
  json args = o.data.to_json();
  args["splits"] = o.splits;
  args["nsr"] = o.nsr;
  args["seed"] = o.seed;
  write_manifest(out, "prepare", args,
                 {{"n_users", set.n_users},
                  {"n_items", set.n_items},
                  {"num_ratings", set.num_ratings()},
                  {"splits", split_info}});
  std::cout << "prepared " << set.n_users << " users, " << set.n_items
            << " items, " << set.num_ratings() << " ratings in " << o.out_dir
            << "\n";
  return 0;
}

// ------------------------------------------------------------------ synth

struct SynthOptions {
  SyntheticSpec spec;
  std::string out_dir;
};

int run_synth(const SynthOptions& o) {
  const auto& s = o.spec;
  const auto set = generate_synthetic(s.n_users, s.n_items, s.latent_dim,
                                      s.positives_per_user, s.seed);
  save_prepared_dataset(o.out_dir, "synthetic", set);
  write_file(fs::path(o.out_dir) / "ratings.tsv",
             [&](std::ostream& os) { write_unary_ratings(os, set); });
  write_manifest(o.out_dir, "synth",
                 {{"n_users", s.n_users},
                  {"n_items", s.n_items},
                  {"latent_dim", s.latent_dim},
                  {"positives", s.positives_per_user},
                  {"seed", s.seed}},
                 {{"num_ratings", set.num_ratings()}});
  std::cout << "wrote synthetic dataset to " << o.out_dir << "\n";
  return 0;
}

// ------------------------------------------------------------------ train

struct TrainOptions {
  DatasetOptions data;
  std::string paradigm = "pairwise";
  std::string loss = "NDCG";
  std::optional<double> p;
  std::string lr;  // empty: the paradigm's protocol grid
  int epochs = 3000;
  int eval_every = 10;
  std::uint64_t seed = 0;
  std::string splits = "0";
  double nsr = 1.0;
  int dim = kDefaultLatentDim;
  double l2 = 0.0;
  double init_std = kDefaultInitStd;
  bool save_models = false;
  std::string out_dir;
};

LossSpec resolve_loss(const std::string& name, std::optional<double> p,
                      Paradigm paradigm) {
  LossSpec loss = LossSpec::parse(name);
  if (p) {
    if (loss.p && *loss.p != *p) {
      throw std::invalid_argument("--p conflicts with the persistence in --loss");
    }
    loss.p = *p;
  }
  loss.validate(paradigm);
  return loss;
}

std::string metric_file_tag(const MetricKind& m) {
  std::string s = m.name();
  for (auto& c : s) {
    if (c == '@') c = '_';
  }
  return s;
}

int run_train(const TrainOptions& o) {
  const Paradigm paradigm = parse_paradigm(o.paradigm);
  const LossSpec loss = resolve_loss(o.loss, o.p, paradigm);
  const auto grid = o.lr.empty() ? (paradigm == Paradigm::kPairwise
                                        ? pairwise_lr_grid()
                                        : listwise_lr_grid())
                                 : parse_list<double>(o.lr);
  const auto src = o.data.source();
  const auto set = src.load();
  const fs::path out(o.out_dir);

  std::vector<GridResultRow> rows;
  std::vector<CellFailure> failures;
  for (int split_id : parse_list<int>(o.splits)) {
    const auto split = sample_negatives(split_train_test(set, split_id, o.seed),
                                        set, o.nsr, o.seed);
    const fs::path split_dir = out / ("split" + std::to_string(split_id));
    write_file(split_dir / "split.csv",
               [&](std::ostream& os) { write_split(os, split); });

    TrainConfig cfg;
    cfg.paradigm = paradigm;
    cfg.loss = loss;
    cfg.epochs = o.epochs;
    cfg.eval_every = o.eval_every;
    cfg.seed = o.seed + static_cast<std::uint64_t>(split_id);
    cfg.nsr = o.nsr;
    cfg.dim = o.dim;
    cfg.l2 = o.l2;
    cfg.init_std = o.init_std;
    cfg.keep_best_models = o.save_models;
    cfg.validate();

    const auto runs = train_lr_grid(cfg, split, set, grid);
    for (const auto& run : runs) {
      const std::string tag = "lr" + format_double(run.learning_rate);
      write_file(split_dir / ("history_" + tag + ".csv"),
                 [&](std::ostream& os) { write_history(os, run.history); });
      write_file(split_dir / ("training_log_" + tag + ".csv"),
                 [&](std::ostream& os) { write_training_log(os, run.history); });
    }
    const GridCell cell{src.name, split_id, o.nsr, paradigm, loss};
    try {
      const auto cell_result = cell_rows(cell, runs);
      if (o.save_models) {
        for (const auto& row : cell_result) {
          for (const auto& run : runs) {
            if (run.learning_rate != row.learning_rate) continue;
            save_model((split_dir / ("model_" + metric_file_tag(row.eval_metric) +
                                     ".bin"))
                           .string(),
                       run.history.best_models.at(row.eval_metric));
          }
        }
      }
      rows.insert(rows.end(), cell_result.begin(), cell_result.end());
    } catch (const DataError& e) {
      failures.push_back({cell, e.what()});
    }
  }
  write_file(out / "results.csv",
             [&](std::ostream& os) { write_results(os, rows); });
  if (!failures.empty()) {
    write_file(out / "failures.csv",
               [&](std::ostream& os) { write_failures(os, failures); });
  }
  json args = o.data.to_json();
  args.update({{"paradigm", paradigm_name(paradigm)},
               {"loss", loss.name()},
               {"lr", grid},
               {"epochs", o.epochs},
               {"eval_every", o.eval_every},
               {"seed", o.seed},
               {"splits", o.splits},
               {"nsr", o.nsr},
               {"dim", o.dim},
               {"l2", o.l2},
               {"init_std", o.init_std},
               {"save_models", o.save_models}});
  write_manifest(out, "train", args,
                 {{"n_users", set.n_users},
                  {"n_items", set.n_items},
                  {"result_rows", rows.size()},
                  {"failed_splits", failures.size()}});
  for (const auto& r : rows) {
    std::cout << "split " << r.split_id << "  " << r.eval_metric.name() << " = "
              << format_double(r.value) << " (epoch " << r.best_epoch << ", lr "
              << format_double(r.learning_rate) << ")\n";
  }
  return failures.empty() ? 0 : 3;
}

// ------------------------------------------------------------------- grid

struct GridOptionsCli {
  std::string config;
  std::string out_dir;
  int workers = 1;
  bool resume = false;
  std::optional<int> epochs;
  std::optional<int> eval_every;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> splits;
  std::optional<std::string> nsr;
  std::optional<std::string> paradigm;
  std::optional<std::string> loss;
};

int run_grid_cmd(const GridOptionsCli& o) {
  GridSpec spec = load_grid_spec(o.config);
  if (o.epochs) spec.epochs = *o.epochs;
  if (o.eval_every) spec.eval_every = *o.eval_every;
  if (o.seed) spec.split_seed = spec.train_seed = *o.seed;
  if (o.splits) spec.splits = parse_list<int>(*o.splits);
  if (o.nsr) spec.nsrs = parse_list<double>(*o.nsr);
  if (o.paradigm) spec.paradigms = {parse_paradigm(*o.paradigm)};
  if (o.loss) {
    for (auto* losses : {&spec.pairwise_losses, &spec.listwise_losses}) {
      std::vector<LossSpec> kept;
      for (const auto& l : *losses) {
        if (l.name() == *o.loss) kept.push_back(l);
      }
      *losses = kept;
    }
  }
  spec.validate();
  const fs::path out(o.out_dir);
  fs::create_directories(out);
  write_file(out / "grid.json",
             [&](std::ostream& os) { os << grid_spec_to_json(spec) << '\n'; });
  const auto result = run_grid(spec, {out.string(), o.resume, o.workers});
  write_file(out / "results.csv",
             [&](std::ostream& os) { write_results(os, result.rows); });
  write_file(out / "failures.csv",
             [&](std::ostream& os) { write_failures(os, result.failures); });
  write_manifest(out, "grid",
                 {{"config", o.config},
                  {"resume", o.resume},
                  {"effective_spec", "grid.json"}},
                 {{"cells", enumerate_cells(spec).size()},
                  {"result_rows", result.rows.size()},
                  {"failed_cells", result.failures.size()}});
  std::cout << result.rows.size() << " result rows, " << result.failures.size()
            << " failed cells; see " << (out / "results.csv").string() << "\n";
  return result.failures.empty() ? 0 : 3;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string results;
  std::string out_dir;
  int resamples = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  std::string model_a;
  std::string model_b;
  std::string split_file;
  std::string metric = "RR";
  std::optional<double> p;
};

int run_analyze(const AnalyzeOptions& o) {
  if (o.results.empty() && o.model_a.empty()) {
    throw std::invalid_argument(
        "analyze needs --results and/or --model-a/--model-b/--split-file");
  }
  const fs::path out(o.out_dir);
  json extra = json::object();
  int status = 0;
  if (!o.results.empty()) {
    std::ifstream in(o.results);
    if (!in) throw std::runtime_error("cannot open " + o.results);
    const auto rows = read_results(in);
    const auto z = standardize(rows);
    write_file(out / "standardized.csv",
               [&](std::ostream& os) { write_standardized(os, z); });
    write_file(out / "summary.csv", [&](std::ostream& os) {
      write_summary(os, summarize(z, o.resamples, o.confidence, o.seed));
    });
    try {
      const auto freq = best_loss_frequency(rows);
      write_file(out / "frequency.csv",
                 [&](std::ostream& os) { write_frequency(os, freq); });
    } catch (const DataError& e) {
      std::cerr << "frequency.csv not written: " << e.what() << "\n";
      extra["frequency_error"] = e.what();
      status = 3;
    }
    extra["result_rows"] = rows.size();
  }
  if (!o.model_a.empty()) {
    if (o.model_b.empty() || o.split_file.empty()) {
      throw std::invalid_argument("--model-a needs --model-b and --split-file");
    }
    const auto a = load_model(o.model_a);
    const auto b = load_model(o.model_b);
    std::ifstream in(o.split_file);
    if (!in) throw std::runtime_error("cannot open " + o.split_file);
    const auto split = read_split(in, a.n_users, 0.0);
    MetricKind metric = MetricKind::parse(o.metric);
    if (o.p) metric.p = *o.p;
    const auto diffs = per_user_diff(a, b, split, metric);
    write_file(out / "per_user_diff.csv",
               [&](std::ostream& os) { write_per_user_diff(os, diffs); });
    extra["per_user_metric"] = metric.name();
    extra["diff_activity_correlation"] = diff_activity_correlation(diffs);
  }
  write_manifest(out, "analyze",
                 {{"results", o.results},
                  {"resamples", o.resamples},
                  {"confidence", o.confidence},
                  {"seed", o.seed},
                  {"model_a", o.model_a},
                  {"model_b", o.model_b},
                  {"split_file", o.split_file},
                  {"metric", o.metric}},
                 extra);
  std::cout << "analysis written to " << o.out_dir << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankopt: pairwise and listwise learning to rank for implicit "
               "feedback"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  PrepareOptions prep;
  auto* prepare = app.add_subcommand(
      "prepare", "Ingest a ratings file, binarize, filter, split and sample negatives");
  prep.data.add(prepare);
  prepare->add_option("--splits", prep.splits, "Comma-separated split ids");
  prepare->add_option("--nsr", prep.nsr, "Comma-separated negative-to-positive ratios");
  prepare->add_option("--seed", prep.seed, "Split and sampling seed");
  prepare->add_option("--out-dir", prep.out_dir, "Output directory")->required();

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--n-users", syn.spec.n_users);
  synth->add_option("--n-items", syn.spec.n_items);
  synth->add_option("--latent-dim", syn.spec.latent_dim);
  synth->add_option("--positives", syn.spec.positives_per_user,
                    "Positives per user");
  synth->add_option("--seed", syn.spec.seed);
  synth->add_option("--out-dir", syn.out_dir, "Output directory")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand(
      "train", "Train one (dataset, NSR, paradigm, loss) cell over a learning-rate grid");
  tr.data.add(train_cmd);
  train_cmd->add_option("--paradigm", tr.paradigm, "pairwise or listwise")
      ->check(CLI::IsMember({"pairwise", "listwise"}));
  train_cmd->add_option("--loss", tr.loss, "RR, AP, NDCG or NRBP");
  train_cmd->add_option("--p", tr.p, "Persistence for the pairwise NRBP loss");
  train_cmd->add_option("--lr", tr.lr,
                        "Comma-separated learning rates (default: protocol grid)");
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--eval-every", tr.eval_every);
  train_cmd->add_option("--seed", tr.seed, "Split seed; training uses seed + split id");
  train_cmd->add_option("--splits", tr.splits, "Comma-separated split ids");
  train_cmd->add_option("--nsr", tr.nsr, "Negative-to-positive ratio");
  train_cmd->add_option("--dim", tr.dim, "Latent dimension");
  train_cmd->add_option("--l2", tr.l2);
  train_cmd->add_option("--init-std", tr.init_std);
  train_cmd->add_flag("--save-models", tr.save_models,
                      "Write best-epoch checkpoints per evaluation metric");
  train_cmd->add_option("--out-dir", tr.out_dir, "Output directory")->required();

  GridOptionsCli gr;
  auto* grid = app.add_subcommand("grid", "Run a full experiment grid from a JSON spec");
  grid->add_option("--config", gr.config, "Grid spec (JSON)")->required();
  grid->add_option("--out-dir", gr.out_dir, "Output directory")->required();
  grid->add_option("--workers", gr.workers, "Concurrent cells");
  grid->add_flag("--resume", gr.resume, "Reuse cached cells from a previous run");
  grid->add_option("--epochs", gr.epochs, "Override epochs");
  grid->add_option("--eval-every", gr.eval_every, "Override eval_every");
  grid->add_option("--seed", gr.seed, "Override split and training seeds");
  grid->add_option("--splits", gr.splits, "Override split ids");
  grid->add_option("--nsr", gr.nsr, "Override NSR values");
  grid->add_option("--paradigm", gr.paradigm, "Restrict to one paradigm");
  grid->add_option("--loss", gr.loss, "Restrict to one loss name");

  AnalyzeOptions an;
  auto* analyze = app.add_subcommand(
      "analyze", "Standardize results, count best losses, compare per-user scores");
  analyze->add_option("--results", an.results, "results.csv from grid or train");
  analyze->add_option("--out-dir", an.out_dir, "Output directory")->required();
  analyze->add_option("--resamples", an.resamples, "Bootstrap resamples");
  analyze->add_option("--confidence", an.confidence, "Bootstrap interval level");
  analyze->add_option("--seed", an.seed, "Bootstrap seed");
  analyze->add_option("--model-a", an.model_a, "Checkpoint A for per-user differences");
  analyze->add_option("--model-b", an.model_b, "Checkpoint B");
  analyze->add_option("--split-file", an.split_file, "Split the models were trained on");
  analyze->add_option("--metric", an.metric, "Evaluation metric for per-user differences");
  analyze->add_option("--p", an.p, "Persistence for an NRBP --metric");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) return run_prepare(prep);
    if (*synth) return run_synth(syn);
    if (*train_cmd) return run_train(tr);
    if (*grid) return run_grid_cmd(gr);
    if (*analyze) return run_analyze(an);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
