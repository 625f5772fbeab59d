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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "treezone/numcore/tensor.hpp"

namespace treezone {

using Vector = std::vector<double>;

enum class OovPolicy { Subword, Random, Zero };

std::string to_string(OovPolicy p);
OovPolicy parse_oov_policy(std::string_view s);

/// Character n-gram vectors keyed by the exact gram string, boundary
/// markers included.
struct SubwordTable {
  static constexpr std::size_t kMinN = 3;
  static constexpr std::size_t kMaxN = 6;

  std::size_t dim = 0;
  std::unordered_map<std::string, Vector> grams;
};

/// All code-point substrings of "<form>" with length 3..6, ordered by
/// length and then by position. Duplicates are kept.
std::vector<std::string> extract_ngrams(std::string_view form);

/// Pre-trained word vectors plus the policy for forms not in the table.
/// Immutable after loading; lookups are safe from any thread.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim, std::uint64_t seed = 0);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  std::size_t duplicate_count() const { return duplicates_; }
  bool contains(std::string_view form) const;

  OovPolicy oov_policy() const { return policy_; }
  void set_oov_policy(OovPolicy p) { policy_ = p; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  const SubwordTable* subword() const { return subword_ ? &*subword_ : nullptr; }
  /// Attaches a gram table and switches the OOV policy to Subword.
  void set_subword(SubwordTable table);

  /// Stores under the NFC form. Returns false if the form was replaced.
  bool insert(std::string_view form, Vector v);

  /// Exact match on the NFC form, then on its lowercase; empty if neither.
  const Vector* find(std::string_view form) const;

  /// Total: in-table forms return the stored vector, others follow the
  /// OOV policy.
  Vector lookup(std::string_view form) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, Vector> table_;
  std::optional<SubwordTable> subword_;
  OovPolicy policy_ = OovPolicy::Random;
  std::uint64_t seed_ = 0;
  std::size_t duplicates_ = 0;
};

/// Reads `form v1 ... vdim` lines; an optional leading `count dim` header
/// is skipped. Throws FormatError naming the line on inconsistent width.
EmbeddingStore load_text_vectors(std::istream& in, std::uint64_t seed = 0);
EmbeddingStore load_text_vectors_file(const std::string& path, std::uint64_t seed = 0);

/// Same syntax; keys are gram strings including `<` and `>`.
SubwordTable load_subword_table(std::istream& in, std::size_t expected_dim);
SubwordTable load_subword_table_file(const std::string& path, std::size_t expected_dim);

void write_text_vectors(std::ostream& out, const std::vector<std::string>& forms,
                        const std::vector<Vector>& rows);

/// Planted vectors for forms w0..w<vocab_size-1>, uniform in (-1, 1).
EmbeddingStore make_synthetic_store(std::uint64_t seed, std::size_t vocab_size,
                                    std::size_t dim);

/// Row-per-form embedding matrix with its own learning rate. A rate of
/// zero freezes the matrix.
template <std::floating_point T>
struct EmbeddingLayer {
  Parameter<T> matrix;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> forms;
  double learning_rate = 0.0;

  std::optional<std::size_t> row_of(const std::string& form) const {
    auto it = index.find(form);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

template <std::floating_point T>
EmbeddingLayer<T> build_embedding_layer(const EmbeddingStore& store,
                                        const std::vector<std::string>& vocab,
                                        double trainable_lr);

}  // namespace treezone
