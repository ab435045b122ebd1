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

#include "rankopt/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "rankopt/errors.h"
#include "rankopt/random.h"

namespace rankopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& text, long line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("not a number: '" + text + "'", line_no);
  }
  return v;
}

int to_int(const std::string& text, long line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("not an integer: '" + text + "'", line_no);
  }
  return v;
}

std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) out += format_double(x) + ";";
  return out;
}

std::string source_descriptor(const DatasetSource& src) {
  std::ostringstream os;
  os << src.name << '|';
  if (src.synthetic) {
    const auto& s = *src.synthetic;
    os << "synthetic:" << s.n_users << ':' << s.n_items << ':' << s.latent_dim
       << ':' << s.positives_per_user << ':' << s.seed;
  } else {
    os << "file:" << src.path << ':'
       << (src.format == RatingFormat::kGraded ? "graded" : "unary") << ':'
       << src.positive_threshold << ':' << src.min_positives;
  }
  return os.str();
}

std::string cell_key(const GridSpec& spec, const DatasetSource& src,
                     const GridCell& cell) {
  std::ostringstream os;
  os << "v1|" << source_descriptor(src) << '|' << cell.split_id << '|'
     << spec.split_seed << '|' << format_double(cell.nsr) << '|'
     << paradigm_name(cell.paradigm) << '|' << cell.loss.name() << '|'
     << format_list(cell.paradigm == Paradigm::kPairwise ? spec.pairwise_lrs
                                                         : spec.listwise_lrs)
     << '|' << spec.epochs << '|' << spec.eval_every << '|' << spec.dim << '|'
     << format_double(spec.l2) << '|' << format_double(spec.init_std) << '|'
     << spec.train_seed;
  return os.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const DatasetSource& find_source(const GridSpec& spec, const std::string& name) {
  for (const auto& d : spec.datasets) {
    if (d.name == name) return d;
  }
  throw std::invalid_argument("unknown dataset '" + name + "'");
}

RatingFormat parse_format(const std::string& text) {
  if (text == "unary") return RatingFormat::kUnary;
  if (text == "graded") return RatingFormat::kGraded;
  throw std::invalid_argument("format must be 'unary' or 'graded'");
}

}  // namespace

bool is_prepared_dataset(const std::string& path) {
  return fs::is_directory(path) && fs::exists(fs::path(path) / "dataset.json");
}

void save_prepared_dataset(const std::string& dir, const std::string& name,
                           const InteractionSet& set) {
  fs::create_directories(dir);
  const fs::path root(dir);
  json meta = {{"name", name},
               {"n_users", set.n_users},
               {"n_items", set.n_items},
               {"num_ratings", set.num_ratings()}};
  {
    std::ofstream out(root / "dataset.json");
    out << meta.dump(2) << '\n';
  }
  {
    std::ofstream out(root / "interactions.tsv");
    write_interaction_set(out, set);
  }
  auto write_keys = [&](const char* file, const std::vector<std::string>& keys) {
    if (keys.empty()) return;
    std::ofstream out(root / file);
    for (const auto& k : keys) out << k << '\n';
  };
  write_keys("user_keys.txt", set.user_keys);
  write_keys("item_keys.txt", set.item_keys);
}

InteractionSet load_prepared_dataset(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream meta_in(root / "dataset.json");
  if (!meta_in) throw std::runtime_error("cannot open " + (root / "dataset.json").string());
  const json meta = json::parse(meta_in);
  std::ifstream in(root / "interactions.tsv");
  if (!in) throw std::runtime_error("cannot open " + (root / "interactions.tsv").string());
  auto set = read_interaction_set(in, meta.at("n_users").get<int>(),
                                  meta.at("n_items").get<int>());
  auto read_keys = [&](const char* file, std::vector<std::string>& keys) {
    std::ifstream kin(root / file);
    std::string line;
    while (std::getline(kin, line)) keys.push_back(line);
  };
  read_keys("user_keys.txt", set.user_keys);
  read_keys("item_keys.txt", set.item_keys);
  return set;
}

InteractionSet DatasetSource::load() const {
  if (synthetic) {
    return generate_synthetic(synthetic->n_users, synthetic->n_items,
                              synthetic->latent_dim,
                              synthetic->positives_per_user, synthetic->seed);
  }
  if (is_prepared_dataset(path)) return load_prepared_dataset(path);
  return binarize_and_filter(load_interactions(path, format),
                             positive_threshold, min_positives);
}

void GridSpec::validate() const {
  if (datasets.empty()) throw std::invalid_argument("grid has no datasets");
  for (const auto& d : datasets) {
    if (d.name.empty() || d.name.find_first_of(",\n\"") != std::string::npos) {
      throw std::invalid_argument("dataset names must be non-empty, no commas");
    }
    if (!d.synthetic && d.path.empty()) {
      throw std::invalid_argument("dataset '" + d.name +
                                  "' needs a path or a synthetic block");
    }
  }
  if (splits.empty() || nsrs.empty() || paradigms.empty()) {
    throw std::invalid_argument("grid axes must be non-empty");
  }
  for (double r : nsrs) {
    if (!(r > 0.0)) throw std::invalid_argument("nsr must be positive");
  }
  for (const auto& l : pairwise_losses) l.validate(Paradigm::kPairwise);
  for (const auto& l : listwise_losses) l.validate(Paradigm::kListwise);
  if (pairwise_lrs.empty() || listwise_lrs.empty()) {
    throw std::invalid_argument("learning-rate grids must be non-empty");
  }
  if (epochs < 0 || eval_every < 1 || dim < 1) {
    throw std::invalid_argument("invalid epochs/eval_every/dim");
  }
}

GridSpec parse_grid_spec(const std::string& json_text) {
  const json j = json::parse(json_text);
  GridSpec spec;
  for (const auto& d : j.at("datasets")) {
    DatasetSource src;
    src.name = d.at("name").get<std::string>();
    if (d.contains("synthetic")) {
      const auto& s = d.at("synthetic");
      SyntheticSpec syn;
      syn.n_users = s.value("n_users", syn.n_users);
      syn.n_items = s.value("n_items", syn.n_items);
      syn.latent_dim = s.value("latent_dim", syn.latent_dim);
      syn.positives_per_user = s.value("positives_per_user", syn.positives_per_user);
      syn.seed = s.value("seed", syn.seed);
      src.synthetic = syn;
    } else {
      src.path = d.at("path").get<std::string>();
      src.format = parse_format(d.value("format", std::string("unary")));
      src.positive_threshold = d.value("positive_threshold", 4);
      src.min_positives = d.value("min_positives", 25);
    }
    spec.datasets.push_back(std::move(src));
  }
  spec.splits = j.value("splits", spec.splits);
  spec.split_seed = j.value("split_seed", spec.split_seed);
  spec.nsrs = j.value("nsr", spec.nsrs);
  if (j.contains("paradigms")) {
    spec.paradigms.clear();
    for (const auto& p : j.at("paradigms")) {
      spec.paradigms.push_back(parse_paradigm(p.get<std::string>()));
    }
  }
  auto losses = [&](const char* key, std::vector<LossSpec>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& l : j.at(key)) out.push_back(LossSpec::parse(l.get<std::string>()));
  };
  losses("pairwise_losses", spec.pairwise_losses);
  losses("listwise_losses", spec.listwise_losses);
  spec.pairwise_lrs = j.value("pairwise_lr_grid", spec.pairwise_lrs);
  spec.listwise_lrs = j.value("listwise_lr_grid", spec.listwise_lrs);
  spec.epochs = j.value("epochs", spec.epochs);
  spec.eval_every = j.value("eval_every", spec.eval_every);
  spec.dim = j.value("dim", spec.dim);
  spec.l2 = j.value("l2", spec.l2);
  spec.init_std = j.value("init_std", spec.init_std);
  spec.train_seed = j.value("train_seed", spec.train_seed);
  spec.validate();
  return spec;
}

GridSpec load_grid_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid_spec(ss.str());
}

std::string grid_spec_to_json(const GridSpec& spec) {
  json j;
  j["datasets"] = json::array();
  for (const auto& d : spec.datasets) {
    json dj;
    dj["name"] = d.name;
    if (d.synthetic) {
      dj["synthetic"] = {{"n_users", d.synthetic->n_users},
                         {"n_items", d.synthetic->n_items},
                         {"latent_dim", d.synthetic->latent_dim},
                         {"positives_per_user", d.synthetic->positives_per_user},
                         {"seed", d.synthetic->seed}};
    } else {
      dj["path"] = d.path;
      dj["format"] = d.format == RatingFormat::kGraded ? "graded" : "unary";
      dj["positive_threshold"] = d.positive_threshold;
      dj["min_positives"] = d.min_positives;
    }
    j["datasets"].push_back(dj);
  }
  j["splits"] = spec.splits;
  j["split_seed"] = spec.split_seed;
  j["nsr"] = spec.nsrs;
  j["paradigms"] = json::array();
  for (auto p : spec.paradigms) j["paradigms"].push_back(paradigm_name(p));
  j["pairwise_losses"] = json::array();
  for (const auto& l : spec.pairwise_losses) j["pairwise_losses"].push_back(l.name());
  j["listwise_losses"] = json::array();
  for (const auto& l : spec.listwise_losses) j["listwise_losses"].push_back(l.name());
  j["pairwise_lr_grid"] = spec.pairwise_lrs;
  j["listwise_lr_grid"] = spec.listwise_lrs;
  j["epochs"] = spec.epochs;
  j["eval_every"] = spec.eval_every;
  j["dim"] = spec.dim;
  j["l2"] = spec.l2;
  j["init_std"] = spec.init_std;
  j["train_seed"] = spec.train_seed;
  return j.dump(2);
}

std::vector<GridCell> enumerate_cells(const GridSpec& spec) {
  std::vector<GridCell> cells;
  for (const auto& d : spec.datasets) {
    for (int split : spec.splits) {
      for (double nsr : spec.nsrs) {
        for (auto paradigm : spec.paradigms) {
          const auto& losses = paradigm == Paradigm::kPairwise
                                   ? spec.pairwise_losses
                                   : spec.listwise_losses;
          for (const auto& loss : losses) {
            cells.push_back({d.name, split, nsr, paradigm, loss});
          }
        }
      }
    }
  }
  return cells;
}

std::vector<GridResultRow> run_cell(const GridSpec& spec, const GridCell& cell,
                                    const InteractionSet& set) {
  const auto partial = split_train_test(set, cell.split_id, spec.split_seed);
  const auto split = sample_negatives(partial, set, cell.nsr, spec.split_seed);
  TrainConfig base;
  base.paradigm = cell.paradigm;
  base.loss = cell.loss;
  base.epochs = spec.epochs;
  base.eval_every = spec.eval_every;
  base.seed = spec.train_seed + static_cast<std::uint64_t>(cell.split_id);
  base.nsr = cell.nsr;
  base.dim = spec.dim;
  base.l2 = spec.l2;
  base.init_std = spec.init_std;
  const auto& grid = cell.paradigm == Paradigm::kPairwise ? spec.pairwise_lrs
                                                          : spec.listwise_lrs;
  return cell_rows(cell, train_lr_grid(base, split, set, grid));
}

std::vector<GridResultRow> cell_rows(const GridCell& cell,
                                     const std::vector<LrRun>& runs) {
  std::vector<GridResultRow> rows;
  for (const auto& metric : protocol_metrics()) {
    const int chosen = select_learning_rate(runs, metric);
    if (chosen < 0) {
      throw DataError("every learning rate diverged: " +
                      runs.front().history.failure);
    }
    const auto best = select_best(runs[chosen].history, metric);
    rows.push_back({cell.dataset, cell.split_id, cell.nsr, cell.paradigm,
                    cell.loss.name(), metric, best.value, best.epoch,
                    runs[chosen].learning_rate});
  }
  return rows;
}

GridResult run_grid(const GridSpec& spec, const GridOptions& options) {
  spec.validate();
  const auto cells = enumerate_cells(spec);

  std::vector<InteractionSet> sets;
  sets.reserve(spec.datasets.size());
  for (const auto& d : spec.datasets) sets.push_back(d.load());
  auto set_for = [&](const std::string& name) -> const InteractionSet& {
    for (std::size_t k = 0; k < spec.datasets.size(); ++k) {
      if (spec.datasets[k].name == name) return sets[k];
    }
    throw std::invalid_argument("unknown dataset '" + name + "'");
  };

  fs::path cache_dir;
  if (!options.out_dir.empty()) {
    cache_dir = fs::path(options.out_dir) / "cells";
    fs::create_directories(cache_dir);
  }

  std::vector<std::vector<GridResultRow>> rows_by_cell(cells.size());
  std::vector<std::optional<std::string>> cell_error(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const auto& cell = cells[idx];
      fs::path cache_file;
      if (!cache_dir.empty()) {
        const auto key = cell_key(spec, find_source(spec, cell.dataset), cell);
        cache_file = cache_dir / (hex64(fnv1a(key)) + ".csv");
        if (options.resume && fs::exists(cache_file)) {
          std::ifstream in(cache_file);
          rows_by_cell[idx] = read_results(in);
          continue;
        }
      }
      try {
        rows_by_cell[idx] = run_cell(spec, cell, set_for(cell.dataset));
      } catch (const std::exception& e) {
        cell_error[idx] = e.what();
        continue;
      }
      if (!cache_file.empty()) {
        const fs::path tmp = cache_file.string() + ".tmp";
        {
          std::ofstream out(tmp);
          write_results(out, rows_by_cell[idx]);
        }
        fs::rename(tmp, cache_file);
      }
    }
  };

  const int n_workers = std::max(1, options.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  GridResult result;
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    if (cell_error[idx]) {
      result.failures.push_back({cells[idx], *cell_error[idx]});
      continue;
    }
    result.rows.insert(result.rows.end(), rows_by_cell[idx].begin(),
                       rows_by_cell[idx].end());
  }
  return result;
}

std::vector<StandardizedRow> standardize(const std::vector<GridResultRow>& rows) {
  std::map<std::tuple<std::string, double, MetricKind>, std::vector<std::size_t>>
      groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    groups[{rows[i].dataset, rows[i].nsr, rows[i].eval_metric}].push_back(i);
  }
  std::vector<StandardizedRow> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i].row = rows[i];
  for (const auto& [key, members] : groups) {
    const double n = static_cast<double>(members.size());
    double mean = 0.0;
    for (auto i : members) mean += rows[i].value;
    mean /= n;
    double var = 0.0;
    for (auto i : members) var += (rows[i].value - mean) * (rows[i].value - mean);
    const double sd = std::sqrt(var / n);
    const bool degenerate = members.size() < 2 || !(sd > 0.0);
    for (auto i : members) {
      out[i].degenerate = degenerate;
      out[i].z_value = degenerate ? 0.0 : (rows[i].value - mean) / sd;
    }
  }
  return out;
}

std::vector<FrequencyRow> best_loss_frequency(
    const std::vector<GridResultRow>& rows) {
  using Cell = std::pair<int, double>;  // (split, nsr)
  using GroupKey = std::tuple<std::string, Paradigm, MetricKind>;

  std::map<std::string, std::vector<Cell>> dataset_cells;
  std::vector<GroupKey> group_order;
  std::map<GroupKey, std::vector<std::string>> group_losses;
  std::map<GroupKey, std::map<std::pair<std::string, Cell>, double>> values;
  for (const auto& r : rows) {
    auto& dc = dataset_cells[r.dataset];
    const Cell c{r.split_id, r.nsr};
    if (std::find(dc.begin(), dc.end(), c) == dc.end()) dc.push_back(c);
    const GroupKey g{r.dataset, r.paradigm, r.eval_metric};
    if (!group_losses.count(g)) group_order.push_back(g);
    auto& ls = group_losses[g];
    if (std::find(ls.begin(), ls.end(), r.loss) == ls.end()) ls.push_back(r.loss);
    values[g][{r.loss, c}] = r.value;
  }

  std::vector<std::string> missing;
  std::vector<FrequencyRow> out;
  for (const auto& g : group_order) {
    const auto& losses = group_losses[g];
    std::vector<int> counts(losses.size(), 0);
    for (const auto& c : dataset_cells[std::get<0>(g)]) {
      double best = -std::numeric_limits<double>::infinity();
      bool complete = true;
      for (const auto& loss : losses) {
        auto it = values[g].find({loss, c});
        if (it == values[g].end()) {
          complete = false;
          missing.push_back(std::get<0>(g) + "/" + paradigm_name(std::get<1>(g)) +
                            "/" + loss + "/" + std::get<2>(g).name() + "/split " +
                            std::to_string(c.first) + "/nsr " +
                            format_double(c.second));
          continue;
        }
        best = std::max(best, it->second);
      }
      if (!complete) continue;
      for (std::size_t l = 0; l < losses.size(); ++l) {
        if (values[g][{losses[l], c}] == best) ++counts[l];
      }
    }
    for (std::size_t l = 0; l < losses.size(); ++l) {
      out.push_back({std::get<0>(g), std::get<1>(g), std::get<2>(g), losses[l],
                     counts[l]});
    }
  }
  if (!missing.empty()) {
    std::string msg = "incomplete grid, missing cells:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw DataError(msg);
  }
  return out;
}

std::vector<UserDiff> per_user_diff(const FactorModel& model_a,
                                    const FactorModel& model_b,
                                    const SplitAssignment& split,
                                    const MetricKind& eval_metric) {
  const int n_users = static_cast<int>(split.users.size());
  if (model_a.n_users != n_users || model_b.n_users != n_users ||
      model_a.n_items != model_b.n_items) {
    throw ContractViolation("models and split disagree on users or items");
  }
  const auto ra = evaluate_all(model_a, split, {eval_metric});
  const auto rb = evaluate_all(model_b, split, {eval_metric});
  if (ra.evaluated_users != rb.evaluated_users) {
    throw ContractViolation("models evaluated on different user sets");
  }
  std::vector<UserDiff> out;
  out.reserve(ra.evaluated_users.size());
  for (std::size_t k = 0; k < ra.evaluated_users.size(); ++k) {
    const int u = ra.evaluated_users[k];
    out.push_back({u, static_cast<int>(split.users[u].train_pos.size()),
                   ra.per_user[0][k] - rb.per_user[0][k]});
  }
  return out;
}

double diff_activity_correlation(const std::vector<UserDiff>& diffs) {
  const double n = static_cast<double>(diffs.size());
  if (diffs.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (const auto& d : diffs) {
    mx += d.train_positives;
    my += d.diff;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& d : diffs) {
    const double dx = d.train_positives - mx;
    const double dy = d.diff - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<SummaryRow> summarize(const std::vector<StandardizedRow>& rows,
                                  int resamples, double confidence,
                                  std::uint64_t seed) {
  if (resamples < 1) throw std::invalid_argument("resamples must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  using Key = std::tuple<Paradigm, std::string, MetricKind>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) {
    Key k{r.row.paradigm, r.row.loss, r.row.eval_metric};
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(r.z_value);
  }
  // Type-7 (linear interpolation) sample quantile of sorted data.
  auto quantile = [](const std::vector<double>& sorted, double q) {
    const double h = (sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
  };

  std::vector<SummaryRow> out;
  for (std::size_t g = 0; g < order.size(); ++g) {
    const auto& zs = groups[order[g]];
    const double mean =
        std::accumulate(zs.begin(), zs.end(), 0.0) / static_cast<double>(zs.size());
    auto rng = make_rng(RngStream::kBootstrap, {seed, static_cast<std::uint64_t>(g)});
    std::uniform_int_distribution<std::size_t> pick(0, zs.size() - 1);
    std::vector<double> means(resamples);
    for (int b = 0; b < resamples; ++b) {
      double s = 0.0;
      for (std::size_t t = 0; t < zs.size(); ++t) s += zs[pick(rng)];
      means[b] = s / static_cast<double>(zs.size());
    }
    std::sort(means.begin(), means.end());
    const double alpha = 1.0 - confidence;
    SummaryRow row;
    row.paradigm = std::get<0>(order[g]);
    row.loss = std::get<1>(order[g]);
    row.eval_metric = std::get<2>(order[g]);
    row.n = static_cast<int>(zs.size());
    row.mean_z = mean;
    row.ci_low = quantile(means, alpha / 2.0);
    row.ci_high = quantile(means, 1.0 - alpha / 2.0);
    out.push_back(row);
  }
  return out;
}

void write_results(std::ostream& out, const std::vector<GridResultRow>& rows) {
  out << "dataset,split_id,nsr,paradigm,loss,eval_metric,value,best_epoch,"
         "learning_rate\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.split_id << ',' << format_double(r.nsr) << ','
        << paradigm_name(r.paradigm) << ',' << r.loss << ','
        << r.eval_metric.name() << ',' << format_double(r.value) << ','
        << r.best_epoch << ',' << format_double(r.learning_rate) << '\n';
  }
}

std::vector<GridResultRow> read_results(std::istream& in) {
  std::vector<GridResultRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line.rfind("dataset,split_id,nsr,paradigm,loss,eval_metric,value", 0) != 0) {
        throw ParseError("unexpected results header", line_no);
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) throw ParseError("expected 9 columns", line_no);
    GridResultRow r;
    r.dataset = f[0];
    r.split_id = to_int(f[1], line_no);
    r.nsr = to_double(f[2], line_no);
    try {
      r.paradigm = parse_paradigm(f[3]);
      r.eval_metric = MetricKind::parse(f[5]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    r.loss = f[4];
    r.value = to_double(f[6], line_no);
    r.best_epoch = to_int(f[7], line_no);
    r.learning_rate = to_double(f[8], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_failures(std::ostream& out, const std::vector<CellFailure>& failures) {
  out << "dataset,split_id,nsr,paradigm,loss,reason\n";
  for (const auto& f : failures) {
    std::string reason = f.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    out << f.cell.dataset << ',' << f.cell.split_id << ','
        << format_double(f.cell.nsr) << ',' << paradigm_name(f.cell.paradigm)
        << ',' << f.cell.loss.name() << ',' << reason << '\n';
  }
}

void write_standardized(std::ostream& out,
                        const std::vector<StandardizedRow>& rows) {
  out << "dataset,split_id,nsr,paradigm,loss,eval_metric,value,best_epoch,"
         "learning_rate,z_value,degenerate\n";
  for (const auto& s : rows) {
    const auto& r = s.row;
    out << r.dataset << ',' << r.split_id << ',' << format_double(r.nsr) << ','
        << paradigm_name(r.paradigm) << ',' << r.loss << ','
        << r.eval_metric.name() << ',' << format_double(r.value) << ','
        << r.best_epoch << ',' << format_double(r.learning_rate) << ','
        << format_double(s.z_value) << ',' << (s.degenerate ? 1 : 0) << '\n';
  }
}

void write_frequency(std::ostream& out, const std::vector<FrequencyRow>& rows) {
  out << "dataset,paradigm,eval_metric,loss,count\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << paradigm_name(r.paradigm) << ','
        << r.eval_metric.name() << ',' << r.loss << ',' << r.count << '\n';
  }
}

void write_per_user_diff(std::ostream& out, const std::vector<UserDiff>& diffs) {
  out << "user,train_positives,diff\n";
  for (const auto& d : diffs) {
    out << d.user << ',' << d.train_positives << ',' << format_double(d.diff)
        << '\n';
  }
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,paradigm,loss,eval_metric,n,mean_z,ci_low,ci_high\n";
  for (const auto& r : rows) {
    out << "standardized_mean_bootstrap," << paradigm_name(r.paradigm) << ','
        << r.loss << ',' << r.eval_metric.name() << ',' << r.n << ','
        << format_double(r.mean_z) << ',' << format_double(r.ci_low) << ','
        << format_double(r.ci_high) << '\n';
  }
}

}  // namespace rankopt
