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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rankopt {

// Matrix factorization: f(u, i) = <user row u, item row i>. Rows are stored
// row-major in flat buffers.
struct FactorModel {
  int n_users = 0;
  int n_items = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> user_factors;  // n_users x dim
  std::vector<double> item_factors;  // n_items x dim

  std::span<double> user(int u) {
    return {user_factors.data() + static_cast<std::size_t>(u) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> user(int u) const {
    return {user_factors.data() + static_cast<std::size_t>(u) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<double> item(int i) {
    return {item_factors.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> item(int i) const {
    return {item_factors.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }

  bool operator==(const FactorModel&) const = default;
};

inline constexpr int kDefaultLatentDim = 32;
// Standard deviation of the Gaussian factor initialization.
inline constexpr double kDefaultInitStd = 0.3;

struct SgdConfig {
  double learning_rate = 0.01;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  double init_std = kDefaultInitStd;
};

// Entries drawn i.i.d. from N(0, init_std^2); init_std == 0 gives zeros.
FactorModel init_model(int n_users, int n_items, int dim, std::uint64_t seed,
                       double init_std = kDefaultInitStd);

std::vector<double> predict_scores(const FactorModel& model, int user,
                                   std::span<const int> items);

// Ascent step along per-item score gradients `grad`:
//   U_u += lr * (sum_i g_i V_i - l2 U_u)
//   V_i += lr * (g_i U_u - l2 V_i)
// Every item update reads the pre-update user row. Throws TrainingError on
// a non-finite gradient (epoch is reported as -1; callers add context).
void apply_score_gradients(FactorModel& model, int user,
                           std::span<const int> items,
                           std::span<const double> grad, const SgdConfig& cfg);

// Binary checkpoint: "RKMF" magic, u32 version, u32 M, N, D, u64 seed, then
// user and item factors as row-major little-endian IEEE doubles.
void save_model(std::ostream& out, const FactorModel& model);
FactorModel load_model(std::istream& in);
void save_model(const std::string& path, const FactorModel& model);
FactorModel load_model(const std::string& path);

}  // namespace rankopt
