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

#include "treezone/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "treezone/errors.hpp"
#include "treezone/rng.hpp"
#include "treezone/unicode.hpp"

namespace treezone {

std::string to_string(OovPolicy p) {
  switch (p) {
    case OovPolicy::Subword:
      return "subword";
    case OovPolicy::Random:
      return "random";
    case OovPolicy::Zero:
      return "zero";
  }
  return "?";
}

OovPolicy parse_oov_policy(std::string_view s) {
  if (s == "subword") return OovPolicy::Subword;
  if (s == "random") return OovPolicy::Random;
  if (s == "zero") return OovPolicy::Zero;
  throw UsageError("unknown OOV policy '" + std::string(s) +
                   "' (expected subword, random or zero)");
}

std::vector<std::string> extract_ngrams(std::string_view form) {
  std::vector<std::string> chars{"<"};
  for (std::string& c : unicode::code_points(form)) chars.push_back(std::move(c));
  chars.emplace_back(">");

  std::vector<std::string> grams;
  for (std::size_t n = SubwordTable::kMinN; n <= SubwordTable::kMaxN; ++n) {
    for (std::size_t start = 0; start + n <= chars.size(); ++start) {
      std::string g;
      for (std::size_t i = start; i < start + n; ++i) g += chars[i];
      grams.push_back(std::move(g));
    }
  }
  return grams;
}

EmbeddingStore::EmbeddingStore(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {}

void EmbeddingStore::set_subword(SubwordTable table) {
  if (dim_ == 0) dim_ = table.dim;
  if (table.dim != dim_) {
    throw FormatError("subword table has dimension " + std::to_string(table.dim) +
                      ", word vectors have " + std::to_string(dim_));
  }
  subword_ = std::move(table);
  policy_ = OovPolicy::Subword;
}

bool EmbeddingStore::insert(std::string_view form, Vector v) {
  if (dim_ == 0) dim_ = v.size();
  if (v.size() != dim_) {
    throw DimensionError("vector for '" + std::string(form) + "' has length " +
                         std::to_string(v.size()) + ", store dimension is " +
                         std::to_string(dim_));
  }
  auto [it, inserted] = table_.insert_or_assign(unicode::nfc(form), std::move(v));
  if (!inserted) ++duplicates_;
  return inserted;
}

bool EmbeddingStore::contains(std::string_view form) const { return find(form) != nullptr; }

const Vector* EmbeddingStore::find(std::string_view form) const {
  const std::string key = unicode::nfc(form);
  if (auto it = table_.find(key); it != table_.end()) return &it->second;
  if (auto it = table_.find(unicode::lower(key)); it != table_.end()) return &it->second;
  return nullptr;
}

Vector EmbeddingStore::lookup(std::string_view form) const {
  if (const Vector* v = find(form)) return *v;
  Vector out(dim_, 0.0);
  switch (policy_) {
    case OovPolicy::Zero:
      break;
    case OovPolicy::Random: {
      // A pure function of (seed, form); equivalent to a per-form cache
      // without shared mutable state.
      Rng rng(derive_seed(seed_, stable_hash(unicode::nfc(form))));
      for (double& x : out) x = rng.uniform(-0.05, 0.05);
      break;
    }
    case OovPolicy::Subword: {
      if (!subword_) break;
      for (const std::string& g : extract_ngrams(unicode::nfc(form))) {
        auto it = subword_->grams.find(g);
        if (it == subword_->grams.end()) continue;
        for (std::size_t i = 0; i < dim_; ++i) out[i] += it->second[i];
      }
      break;
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_integer(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Calls `sink(line_no, key, values)` for every data line.
template <typename Sink>
std::size_t read_vector_lines(std::istream& in, Sink&& sink) {
  std::string raw;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::size_t header_dim = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
        header_dim = static_cast<std::size_t>(std::stoull(std::string(fields[1])));
        continue;
      }
    }
    if (fields.size() < 2) {
      throw FormatError("line " + std::to_string(line_no) + ": expected a form and values");
    }
    const std::size_t width = fields.size() - 1;
    if (dim == 0) {
      dim = width;
      if (header_dim != 0 && header_dim != dim) {
        throw FormatError("line " + std::to_string(line_no) + ": header declares dimension " +
                          std::to_string(header_dim) + " but line has " +
                          std::to_string(width) + " values");
      }
    } else if (width != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, got " + std::to_string(width));
    }
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const std::string_view f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[i]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" +
                          std::string(f) + "'");
      }
    }
    sink(line_no, fields[0], std::move(v));
  }
  return dim;
}

}  // namespace

EmbeddingStore load_text_vectors(std::istream& in, std::uint64_t seed) {
  EmbeddingStore store(0, seed);
  read_vector_lines(in, [&](std::size_t, std::string_view form, Vector v) {
    store.insert(form, std::move(v));
  });
  return store;
}

EmbeddingStore load_text_vectors_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file '" + path + "'");
  try {
    return load_text_vectors(in, seed);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

SubwordTable load_subword_table(std::istream& in, std::size_t expected_dim) {
  SubwordTable table;
  table.dim = expected_dim;
  const std::size_t dim =
      read_vector_lines(in, [&](std::size_t line_no, std::string_view key, Vector v) {
        std::string gram = unicode::nfc(key);
        const std::size_t len = unicode::code_points(gram).size();
        if (len < SubwordTable::kMinN || len > SubwordTable::kMaxN) {
          throw FormatError("line " + std::to_string(line_no) + ": gram '" + gram +
                            "' has " + std::to_string(len) + " characters, expected 3..6");
        }
        table.grams.insert_or_assign(std::move(gram), std::move(v));
      });
  if (expected_dim != 0 && dim != 0 && dim != expected_dim) {
    throw FormatError("subword table has dimension " + std::to_string(dim) +
                      ", word vectors have " + std::to_string(expected_dim));
  }
  if (table.dim == 0) table.dim = dim;
  return table;
}

SubwordTable load_subword_table_file(const std::string& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open subword file '" + path + "'");
  try {
    return load_subword_table(in, expected_dim);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_text_vectors(std::ostream& out, const std::vector<std::string>& forms,
                        const std::vector<Vector>& rows) {
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  out << forms.size() << ' ' << dim << '\n';
  char buf[32];
  for (std::size_t r = 0; r < forms.size(); ++r) {
    out << forms[r];
    for (double x : rows[r]) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

EmbeddingStore make_synthetic_store(std::uint64_t seed, std::size_t vocab_size,
                                    std::size_t dim) {
  EmbeddingStore store(dim, seed);
  Rng rng(derive_seed(seed, 0x656d62ULL));
  for (std::size_t w = 0; w < vocab_size; ++w) {
    Vector v(dim);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    store.insert("w" + std::to_string(w), std::move(v));
  }
  return store;
}

template <std::floating_point T>
EmbeddingLayer<T> build_embedding_layer(const EmbeddingStore& store,
                                        const std::vector<std::string>& vocab,
                                        double trainable_lr) {
  if (vocab.empty()) throw ContractError("embedding layer needs a non-empty vocabulary");
  if (store.dim() == 0) throw ContractError("embedding store has no dimension");
  EmbeddingLayer<T> layer;
  Tensor<T> m({vocab.size(), store.dim()});
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    const Vector v = store.lookup(vocab[r]);
    auto row = m.row(r);
    for (std::size_t i = 0; i < v.size(); ++i) row[i] = static_cast<T>(v[i]);
    layer.index.emplace(vocab[r], r);
  }
  layer.matrix = Parameter<T>("embedding", std::move(m));
  layer.forms = vocab;
  layer.learning_rate = trainable_lr;
  return layer;
}

template EmbeddingLayer<float> build_embedding_layer<float>(const EmbeddingStore&,
                                                            const std::vector<std::string>&,
                                                            double);
template EmbeddingLayer<double> build_embedding_layer<double>(const EmbeddingStore&,
                                                              const std::vector<std::string>&,
                                                              double);

}  // namespace treezone
