/*
 * Copyright 2026 The treezone Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "treezone/numcore/tensor.hpp"
#include "treezone/rng.hpp"
#include "treezone/treebank.hpp"

namespace treezone::testing {

/// Random recursive tree: each token hangs off a uniformly chosen earlier
/// one (in a shuffled order), forms from w0..w<vocab-1>.
inline SentenceTree random_tree(Rng& rng, std::size_t n, std::size_t vocab = 10) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i + 1;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<Token> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    Token& t = tokens[order[i] - 1];
    t.index = order[i];
    t.head = i == 0 ? 0 : order[rng.below(i)];
    t.form = "w" + std::to_string(rng.below(vocab));
    t.relation = "dep";
    t.sentiment = static_cast<int>(rng.below(3)) - 1;
  }
  return SentenceTree(std::move(tokens));
}

/// Chain of `n` tokens where token i+1 is the head of token i.
inline SentenceTree chain_tree(std::size_t n, std::size_t vocab, Rng& rng) {
  std::vector<Token> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    tokens[i] = {i + 1, "w" + std::to_string(rng.below(vocab)), i + 1 == n ? 0 : i + 2, "dep",
                 static_cast<int>(rng.below(3)) - 1, std::nullopt};
  }
  return SentenceTree(std::move(tokens));
}

template <typename T>
Tensor<T> random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  for (T& x : t.data()) x = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("treezone_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace treezone::testing
