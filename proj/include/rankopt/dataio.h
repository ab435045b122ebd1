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

// Dataset ingestion, binarization, per-user train/test splitting and
// negative sampling.
//
// Input files hold one interaction per line as `user<TAB>item[<TAB>rating]`.
// Unary sources omit the rating (every row is a positive); graded sources
// carry an integer rating in 1..5. Blank lines and lines starting with '#'
// are ignored.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rankopt {

enum class RatingFormat { kUnary, kGraded };

struct RawRecord {
  std::string user_key;
  std::string item_key;
  int rating = 1;
};

struct RawRatings {
  RatingFormat format = RatingFormat::kUnary;
  std::vector<RawRecord> records;
};

// Binary relevance with dense user (0..n_users-1) and item (0..n_items-1)
// indices. Per-user lists are sorted and pairwise disjoint.
struct InteractionSet {
  int n_users = 0;
  int n_items = 0;
  std::vector<std::vector<int>> positives;
  std::vector<std::vector<int>> explicit_negatives;
  // Original keys by dense index; empty for synthetic data.
  std::vector<std::string> user_keys;
  std::vector<std::string> item_keys;

  long num_ratings() const;
  bool operator==(const InteractionSet&) const = default;
};

struct UserSplit {
  std::vector<int> train_pos;
  std::vector<int> test_pos;
  std::vector<int> train_neg;
  std::vector<int> test_neg;
  // Set when the negative pool could not satisfy the requested count.
  bool pool_exhausted = false;

  bool operator==(const UserSplit&) const = default;
};

// One Monte Carlo split. `nsr` is 0 for a positives-only (partial) split.
struct SplitAssignment {
  int split_id = 0;
  double nsr = 0.0;
  std::vector<UserSplit> users;

  bool operator==(const SplitAssignment&) const = default;
};

RawRatings load_interactions(const std::string& path, RatingFormat format);
RawRatings parse_interactions(std::istream& in, RatingFormat format);

InteractionSet binarize_and_filter(const RawRatings& raw,
                                   int positive_threshold = 4,
                                   int min_positives = 25);

// round-half-up of train_frac * m_u goes to training.
int train_count(int positives, double train_frac = 0.8);

SplitAssignment split_train_test(const InteractionSet& set, int split_id,
                                 std::uint64_t seed, double train_frac = 0.8);

// Draws round(nsr * |train_pos|) train and round(nsr * |test_pos|) test
// negatives per user, uniformly and without replacement from the items the
// user has no positive interaction with. When the pool is too small it is
// shared between train and test in the requested ratio and the user is
// flagged with pool_exhausted.
SplitAssignment sample_negatives(const SplitAssignment& split,
                                 const InteractionSet& set, double nsr,
                                 std::uint64_t seed);

InteractionSet generate_synthetic(int n_users, int n_items, int latent_dim,
                                  int positives_per_user, std::uint64_t seed);

// Split artifact: CSV with header `split_id,user,item,role`, role one of
// train_pos/test_pos/train_neg/test_neg, users and items as dense indices.
// A flagged user gets one extra row with item -1 and role pool_exhausted.
void write_split(std::ostream& out, const SplitAssignment& split);
SplitAssignment read_split(std::istream& in, int n_users, double nsr);

// Dense interaction dump used by prepared dataset directories:
// `user<TAB>item<TAB>label` with label 1 (positive) or 0 (explicit negative).
void write_interaction_set(std::ostream& out, const InteractionSet& set);
InteractionSet read_interaction_set(std::istream& in, int n_users,
                                    int n_items);

// Writes `set` back out in the unary input format (positives only).
void write_unary_ratings(std::ostream& out, const InteractionSet& set);

}  // namespace rankopt
