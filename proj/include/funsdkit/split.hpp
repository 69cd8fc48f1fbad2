// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace funsdkit {

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> validation;
};

namespace detail {

// Unbiased draw in [0, bound) from raw mt19937 output; unlike
// std::uniform_int_distribution the result is identical on every stdlib.
inline std::uint32_t bounded(std::mt19937& rng, std::uint32_t bound) {
  const std::uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
  std::uint32_t x;
  do {
    x = static_cast<std::uint32_t>(rng());
  } while (x >= limit);
  return x % bound;
}

}  // namespace detail

// Sorts ids, Fisher-Yates shuffles them with mt19937(seed), and takes the
// first `train_count` as the training subset. Both halves are re-sorted.
inline SplitManifest make_split(std::vector<std::string> ids,
                                std::size_t train_count, std::uint32_t seed = 42) {
  std::sort(ids.begin(), ids.end());
  std::mt19937 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = detail::bounded(rng, static_cast<std::uint32_t>(i));
    std::swap(ids[i - 1], ids[j]);
  }
  train_count = std::min(train_count, ids.size());
  SplitManifest m;
  m.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(train_count));
  m.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(train_count), ids.end());
  std::sort(m.train.begin(), m.train.end());
  std::sort(m.validation.begin(), m.validation.end());
  return m;
}

inline std::string format_split(const SplitManifest& m) {
  std::string out = "source_id\tsubset\n";
  for (const auto& id : m.train) out += id + "\ttrain\n";
  for (const auto& id : m.validation) out += id + "\tvalidation\n";
  return out;
}

}  // namespace funsdkit
