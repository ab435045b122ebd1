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
#include <initializer_list>
#include <random>
#include <vector>

namespace rankopt {

// Stream tags keep generators derived from the same user seed independent.
enum class RngStream : std::uint64_t {
  kSplit = 0x5350,
  kNegatives = 0x4e45,
  kSynthetic = 0x5359,
  kInit = 0x494e,
  kEpochOrder = 0x4550,
  kBootstrap = 0x424f,
};

// Builds a generator from a stream tag and any number of 64-bit keys.
inline std::mt19937_64 make_rng(RngStream stream,
                                std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (keys.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(static_cast<std::uint64_t>(stream));
  for (auto k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace rankopt
