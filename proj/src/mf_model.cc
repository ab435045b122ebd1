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

#include "rankopt/mf_model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "rankopt/errors.h"
#include "rankopt/random.h"

namespace rankopt {

namespace {

constexpr char kMagic[4] = {'R', 'K', 'M', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw std::runtime_error("truncated model checkpoint");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

FactorModel init_model(int n_users, int n_items, int dim, std::uint64_t seed,
                       double init_std) {
  if (n_users < 1 || n_items < 1 || dim < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (!(init_std >= 0.0) || !std::isfinite(init_std)) {
    throw std::invalid_argument("init_std must be finite and non-negative");
  }
  FactorModel model;
  model.n_users = n_users;
  model.n_items = n_items;
  model.dim = dim;
  model.seed = seed;
  model.user_factors.assign(static_cast<std::size_t>(n_users) * dim, 0.0);
  model.item_factors.assign(static_cast<std::size_t>(n_items) * dim, 0.0);
  if (init_std > 0.0) {
    auto rng = make_rng(RngStream::kInit, {seed});
    std::normal_distribution<double> gauss(0.0, init_std);
    for (auto& x : model.user_factors) x = gauss(rng);
    for (auto& x : model.item_factors) x = gauss(rng);
  }
  return model;
}

std::vector<double> predict_scores(const FactorModel& model, int user,
                                   std::span<const int> items) {
  if (user < 0 || user >= model.n_users) {
    throw std::invalid_argument("user index out of range");
  }
  auto uf = model.user(user);
  std::vector<double> scores(items.size());
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k] < 0 || items[k] >= model.n_items) {
      throw std::invalid_argument("item index out of range");
    }
    auto vf = model.item(items[k]);
    scores[k] = std::inner_product(uf.begin(), uf.end(), vf.begin(), 0.0);
  }
  return scores;
}

void apply_score_gradients(FactorModel& model, int user,
                           std::span<const int> items,
                           std::span<const double> grad, const SgdConfig& cfg) {
  if (items.size() != grad.size()) {
    throw std::invalid_argument("items and gradient differ in length");
  }
  if (user < 0 || user >= model.n_users) {
    throw std::invalid_argument("user index out of range");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw TrainingError("non-finite score gradient for user " +
                              std::to_string(user),
                          -1, user);
    }
  }
  const int dim = model.dim;
  const double lr = cfg.learning_rate;
  auto uf = model.user(user);
  std::vector<double> old_user(uf.begin(), uf.end());
  std::vector<double> user_step(dim, 0.0);
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k] < 0 || items[k] >= model.n_items) {
      throw std::invalid_argument("item index out of range");
    }
    auto vf = model.item(items[k]);
    const double g = grad[k];
    for (int d = 0; d < dim; ++d) {
      user_step[d] += g * vf[d];
      vf[d] += lr * (g * old_user[d] - cfg.l2 * vf[d]);
    }
  }
  for (int d = 0; d < dim; ++d) {
    uf[d] += lr * (user_step[d] - cfg.l2 * old_user[d]);
  }
}

void save_model(std::ostream& out, const FactorModel& model) {
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.n_users));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.n_items));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim));
  write_le<std::uint64_t>(out, model.seed);
  for (double x : model.user_factors) write_le<double>(out, x);
  for (double x : model.item_factors) write_le<double>(out, x);
}

FactorModel load_model(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a model checkpoint");
  }
  if (read_le<std::uint32_t>(in) != kVersion) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  FactorModel model;
  model.n_users = static_cast<int>(read_le<std::uint32_t>(in));
  model.n_items = static_cast<int>(read_le<std::uint32_t>(in));
  model.dim = static_cast<int>(read_le<std::uint32_t>(in));
  model.seed = read_le<std::uint64_t>(in);
  model.user_factors.resize(static_cast<std::size_t>(model.n_users) * model.dim);
  model.item_factors.resize(static_cast<std::size_t>(model.n_items) * model.dim);
  for (auto& x : model.user_factors) x = read_le<double>(in);
  for (auto& x : model.item_factors) x = read_le<double>(in);
  return model;
}

void save_model(const std::string& path, const FactorModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_model(out, model);
}

FactorModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_model(in);
}

}  // namespace rankopt
