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

#include "rankopt/dataio.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "rankopt/errors.h"
#include "rankopt/random.h"

namespace rankopt {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

bool contains_sorted(const std::vector<int>& sorted, int value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

}  // namespace

long InteractionSet::num_ratings() const {
  long total = 0;
  for (int u = 0; u < n_users; ++u) {
    total += static_cast<long>(positives[u].size() +
                               explicit_negatives[u].size());
  }
  return total;
}

RawRatings parse_interactions(std::istream& in, RatingFormat format) {
  RawRatings raw;
  raw.format = format;
  std::unordered_set<std::string> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line, '\t');
    RawRecord rec;
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() ||
        fields[1].empty()) {
      throw ParseError("expected user<TAB>item[<TAB>rating]", line_no);
    }
    rec.user_key = std::string(fields[0]);
    rec.item_key = std::string(fields[1]);
    if (format == RatingFormat::kGraded) {
      if (fields.size() != 3 || !parse_number(fields[2], rec.rating) ||
          rec.rating < 1 || rec.rating > 5) {
        throw ParseError("graded rows need an integer rating in 1..5",
                         line_no);
      }
    } else if (fields.size() == 3) {
      if (!parse_number(fields[2], rec.rating) || rec.rating != 1) {
        throw ParseError("unary rows may only carry rating 1", line_no);
      }
    }
    std::string key = rec.user_key;
    key.push_back('\0');
    key += rec.item_key;
    if (!seen.insert(std::move(key)).second) {
      throw DataError("duplicate (user, item) pair (" + rec.user_key + ", " +
                      rec.item_key + ") at line " + std::to_string(line_no));
    }
    raw.records.push_back(std::move(rec));
  }
  return raw;
}

RawRatings load_interactions(const std::string& path, RatingFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_interactions(in, format);
}

InteractionSet binarize_and_filter(const RawRatings& raw,
                                   int positive_threshold, int min_positives) {
  if (raw.records.empty()) throw DataError("no ratings to binarize");

  // Users and items are indexed by first appearance in the input.
  std::unordered_map<std::string, int> user_index;
  std::vector<std::string> user_order;
  std::vector<std::vector<std::size_t>> by_user;
  for (std::size_t r = 0; r < raw.records.size(); ++r) {
    const auto& key = raw.records[r].user_key;
    auto [it, inserted] =
        user_index.emplace(key, static_cast<int>(user_order.size()));
    if (inserted) {
      user_order.push_back(key);
      by_user.emplace_back();
    }
    by_user[it->second].push_back(r);
  }

  auto is_positive = [&](const RawRecord& rec) {
    return raw.format == RatingFormat::kUnary || rec.rating >= positive_threshold;
  };

  InteractionSet set;
  std::unordered_map<std::string, int> item_index;
  for (std::size_t u = 0; u < user_order.size(); ++u) {
    long pos = std::count_if(by_user[u].begin(), by_user[u].end(),
                             [&](std::size_t r) { return is_positive(raw.records[r]); });
    if (pos < min_positives) continue;
    std::vector<int> positives;
    std::vector<int> negatives;
    for (auto r : by_user[u]) {
      const auto& rec = raw.records[r];
      auto [it, inserted] =
          item_index.emplace(rec.item_key, static_cast<int>(set.item_keys.size()));
      if (inserted) set.item_keys.push_back(rec.item_key);
      (is_positive(rec) ? positives : negatives).push_back(it->second);
    }
    std::sort(positives.begin(), positives.end());
    std::sort(negatives.begin(), negatives.end());
    set.positives.push_back(std::move(positives));
    set.explicit_negatives.push_back(std::move(negatives));
    set.user_keys.push_back(user_order[u]);
  }
  set.n_users = static_cast<int>(set.user_keys.size());
  set.n_items = static_cast<int>(set.item_keys.size());
  if (set.n_users == 0) {
    throw DataError("no user has at least " + std::to_string(min_positives) +
                    " positives");
  }
  return set;
}

int train_count(int positives, double train_frac) {
  return round_half_up(train_frac * positives);
}

SplitAssignment split_train_test(const InteractionSet& set, int split_id,
                                 std::uint64_t seed, double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw std::invalid_argument("train_frac must lie in (0, 1)");
  }
  SplitAssignment split;
  split.split_id = split_id;
  split.users.resize(set.n_users);
  for (int u = 0; u < set.n_users; ++u) {
    std::vector<int> items = set.positives[u];
    auto rng = make_rng(RngStream::kSplit,
                        {seed, static_cast<std::uint64_t>(split_id),
                         static_cast<std::uint64_t>(u)});
    std::shuffle(items.begin(), items.end(), rng);
    const int n_train = train_count(static_cast<int>(items.size()), train_frac);
    auto& us = split.users[u];
    us.train_pos.assign(items.begin(), items.begin() + n_train);
    us.test_pos.assign(items.begin() + n_train, items.end());
    std::sort(us.train_pos.begin(), us.train_pos.end());
    std::sort(us.test_pos.begin(), us.test_pos.end());
  }
  return split;
}

SplitAssignment sample_negatives(const SplitAssignment& split,
                                 const InteractionSet& set, double nsr,
                                 std::uint64_t seed) {
  if (!(nsr > 0.0) || !std::isfinite(nsr)) {
    throw std::invalid_argument("nsr must be positive");
  }
  if (static_cast<int>(split.users.size()) != set.n_users) {
    throw ContractViolation("split and interaction set disagree on users");
  }
  SplitAssignment out = split;
  out.nsr = nsr;
  for (int u = 0; u < set.n_users; ++u) {
    auto& us = out.users[u];
    const auto& positives = set.positives[u];
    const int pool = set.n_items - static_cast<int>(positives.size());
    const int want_train = round_half_up(nsr * us.train_pos.size());
    const int want_test = round_half_up(nsr * us.test_pos.size());
    int got_train = want_train;
    int got_test = want_test;
    if (want_train + want_test > pool) {
      // Share a short pool between train and test in the requested ratio.
      got_train = round_half_up(static_cast<double>(pool) * want_train /
                                (want_train + want_test));
      got_test = pool - got_train;
    }
    us.pool_exhausted = got_train < want_train || got_test < want_test;

    auto rng = make_rng(RngStream::kNegatives,
                        {seed, static_cast<std::uint64_t>(split.split_id),
                         static_cast<std::uint64_t>(u),
                         static_cast<std::uint64_t>(std::llround(nsr * 1e6))});
    std::vector<int> drawn;
    const int need = got_train + got_test;
    drawn.reserve(need);
    if (2L * need <= pool) {
      // Sparse draw: rejection against positives and earlier picks.
      std::uniform_int_distribution<int> pick(0, set.n_items - 1);
      std::unordered_set<int> taken;
      while (static_cast<int>(drawn.size()) < need) {
        int item = pick(rng);
        if (contains_sorted(positives, item) || !taken.insert(item).second) {
          continue;
        }
        drawn.push_back(item);
      }
    } else {
      std::vector<int> candidates;
      candidates.reserve(pool);
      for (int i = 0; i < set.n_items; ++i) {
        if (!contains_sorted(positives, i)) candidates.push_back(i);
      }
      for (int k = 0; k < need; ++k) {
        std::uniform_int_distribution<int> pick(k, pool - 1);
        std::swap(candidates[k], candidates[pick(rng)]);
      }
      drawn.assign(candidates.begin(), candidates.begin() + need);
    }
    us.train_neg.assign(drawn.begin(), drawn.begin() + got_train);
    us.test_neg.assign(drawn.begin() + got_train, drawn.end());
    std::sort(us.train_neg.begin(), us.train_neg.end());
    std::sort(us.test_neg.begin(), us.test_neg.end());
  }
  return out;
}

InteractionSet generate_synthetic(int n_users, int n_items, int latent_dim,
                                  int positives_per_user, std::uint64_t seed) {
  if (n_users < 1 || n_items < 1 || latent_dim < 1) {
    throw std::invalid_argument("synthetic dimensions must be positive");
  }
  if (positives_per_user < 1 || n_items < positives_per_user) {
    throw std::invalid_argument(
        "positives_per_user must lie in 1..n_items");
  }
  auto rng = make_rng(RngStream::kSynthetic, {seed});
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> users(static_cast<std::size_t>(n_users) * latent_dim);
  std::vector<double> items(static_cast<std::size_t>(n_items) * latent_dim);
  for (auto& x : users) x = gauss(rng);
  for (auto& x : items) x = gauss(rng);

  InteractionSet set;
  set.n_users = n_users;
  set.n_items = n_items;
  set.positives.resize(n_users);
  set.explicit_negatives.resize(n_users);
  std::vector<double> scores(n_items);
  std::vector<int> order(n_items);
  for (int u = 0; u < n_users; ++u) {
    const double* uf = &users[static_cast<std::size_t>(u) * latent_dim];
    for (int i = 0; i < n_items; ++i) {
      const double* vf = &items[static_cast<std::size_t>(i) * latent_dim];
      scores[i] = std::inner_product(uf, uf + latent_dim, vf, 0.0);
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + positives_per_user,
                      order.end(), [&](int a, int b) {
                        if (scores[a] != scores[b]) return scores[a] > scores[b];
                        return a < b;
                      });
    set.positives[u].assign(order.begin(), order.begin() + positives_per_user);
    std::sort(set.positives[u].begin(), set.positives[u].end());
  }
  return set;
}

void write_split(std::ostream& out, const SplitAssignment& split) {
  out << "split_id,user,item,role\n";
  for (std::size_t u = 0; u < split.users.size(); ++u) {
    const auto& us = split.users[u];
    auto emit = [&](const std::vector<int>& items, const char* role) {
      for (int item : items) {
        out << split.split_id << ',' << u << ',' << item << ',' << role << '\n';
      }
    };
    emit(us.train_pos, "train_pos");
    emit(us.test_pos, "test_pos");
    emit(us.train_neg, "train_neg");
    emit(us.test_neg, "test_neg");
    if (us.pool_exhausted) {
      out << split.split_id << ',' << u << ",-1,pool_exhausted\n";
    }
  }
}

SplitAssignment read_split(std::istream& in, int n_users, double nsr) {
  SplitAssignment split;
  split.nsr = nsr;
  split.users.resize(n_users);
  std::string line;
  long line_no = 0;
  bool have_id = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "split_id,user,item,role") {
        throw ParseError("unexpected split header", line_no);
      }
      continue;
    }
    if (line.empty()) continue;
    auto f = split_fields(line, ',');
    int sid = 0, user = 0, item = 0;
    if (f.size() != 4 || !parse_number(f[0], sid) || !parse_number(f[1], user) ||
        !parse_number(f[2], item) || user < 0 || user >= n_users ||
        (item < 0 && f[3] != "pool_exhausted")) {
      throw ParseError("malformed split row", line_no);
    }
    if (have_id && sid != split.split_id) {
      throw ParseError("mixed split ids in one file", line_no);
    }
    split.split_id = sid;
    have_id = true;
    auto& us = split.users[user];
    if (f[3] == "train_pos") {
      us.train_pos.push_back(item);
    } else if (f[3] == "test_pos") {
      us.test_pos.push_back(item);
    } else if (f[3] == "train_neg") {
      us.train_neg.push_back(item);
    } else if (f[3] == "test_neg") {
      us.test_neg.push_back(item);
    } else if (f[3] == "pool_exhausted") {
      us.pool_exhausted = true;
    } else {
      throw ParseError("unknown role '" + std::string(f[3]) + "'", line_no);
    }
  }
  for (auto& us : split.users) {
    for (auto* v : {&us.train_pos, &us.test_pos, &us.train_neg, &us.test_neg}) {
      std::sort(v->begin(), v->end());
    }
  }
  return split;
}

void write_interaction_set(std::ostream& out, const InteractionSet& set) {
  for (int u = 0; u < set.n_users; ++u) {
    for (int i : set.positives[u]) out << u << '\t' << i << "\t1\n";
    for (int i : set.explicit_negatives[u]) out << u << '\t' << i << "\t0\n";
  }
}

InteractionSet read_interaction_set(std::istream& in, int n_users,
                                    int n_items) {
  InteractionSet set;
  set.n_users = n_users;
  set.n_items = n_items;
  set.positives.resize(n_users);
  set.explicit_negatives.resize(n_users);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_fields(line, '\t');
    int u = 0, i = 0, label = 0;
    if (f.size() != 3 || !parse_number(f[0], u) || !parse_number(f[1], i) ||
        !parse_number(f[2], label) || u < 0 || u >= n_users || i < 0 ||
        i >= n_items || (label != 0 && label != 1)) {
      throw ParseError("malformed interaction row", line_no);
    }
    (label == 1 ? set.positives : set.explicit_negatives)[u].push_back(i);
  }
  for (int u = 0; u < n_users; ++u) {
    std::sort(set.positives[u].begin(), set.positives[u].end());
    std::sort(set.explicit_negatives[u].begin(), set.explicit_negatives[u].end());
  }
  return set;
}

void write_unary_ratings(std::ostream& out, const InteractionSet& set) {
  for (int u = 0; u < set.n_users; ++u) {
    for (int i : set.positives[u]) out << 'u' << u << "\ti" << i << '\n';
  }
}

}  // namespace rankopt
