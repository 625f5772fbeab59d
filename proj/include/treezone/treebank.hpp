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
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace treezone {

inline constexpr std::size_t kNumClasses = 3;

/// Sentiment -1/0/+1 to class index 0/1/2 and back.
inline std::size_t sentiment_to_class(int sentiment) {
  return static_cast<std::size_t>(sentiment + 1);
}
inline int class_to_sentiment(std::size_t cls) { return static_cast<int>(cls) - 1; }

struct Token {
  std::size_t index = 0;  // 1-based
  std::string form;
  std::size_t head = 0;   // 0 = root
  std::string relation;   // carried through, never used by the model
  int sentiment = 0;      // -1, 0 or +1
  std::optional<std::string> lemma;

  std::size_t label() const { return sentiment_to_class(sentiment); }
  friend bool operator==(const Token&, const Token&) = default;
};

/// One dependency tree. Construction derives the child lists from the
/// head fields but does not validate; see validate_tree().
class SentenceTree {
 public:
  SentenceTree() = default;
  explicit SentenceTree(std::vector<Token> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<Token>& tokens() const { return tokens_; }

  /// 1-based access.
  const Token& token(std::size_t index) const { return tokens_.at(index - 1); }

  /// Children of `index` in ascending order; index 0 yields the root(s).
  const std::vector<std::size_t>& children(std::size_t index) const {
    return children_.at(index);
  }

  /// The first token whose head is 0, or 0 if there is none.
  std::size_t root() const;

  friend bool operator==(const SentenceTree& a, const SentenceTree& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<Token> tokens_;
  std::vector<std::vector<std::size_t>> children_;  // indexed 0..n
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string message() const;
};

/// Accepts iff the tree has exactly one root, no self-loops, no heads
/// outside the sentence and every token reaches the root.
ValidationReport validate_tree(const SentenceTree& tree);

/// Node indices with every child listed before its parent.
std::vector<std::size_t> bottom_up_order(const SentenceTree& tree);

class Treebank {
 public:
  Treebank() = default;
  explicit Treebank(std::vector<SentenceTree> sentences);

  const std::vector<SentenceTree>& sentences() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }

  /// Distinct forms (lexicographic) with occurrence counts.
  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  std::size_t node_count() const;

  friend bool operator==(const Treebank& a, const Treebank& b) {
    return a.sentences_ == b.sentences_;
  }

 private:
  std::vector<SentenceTree> sentences_;
  std::map<std::string, std::size_t> vocabulary_;
};

/// Reads the tab-separated treebank format:
///
///   index<TAB>form<TAB>head<TAB>relation<TAB>sentiment[<TAB>lemma]
///
/// one token per line, blank lines between sentences, `#` comments.
/// Throws ParseError (with line number) or TreeError (with sentence
/// ordinal).
Treebank parse_treebank(std::istream& in);
Treebank parse_treebank_file(const std::string& path);

void write_treebank(std::ostream& out, const Treebank& tb);
std::string serialize_treebank(const Treebank& tb);

/// Label given to token form "w<id>" by the planted synthetic rule:
/// id divisible by 5 is neutral, otherwise even ids are positive and
/// odd ids negative.
int planted_sentiment(std::size_t word_id);

/// Deterministic random treebank over forms w0..w<vocab_size-1>, labeled
/// with planted_sentiment().
Treebank make_synthetic_treebank(std::uint64_t seed, std::size_t n_sentences,
                                 std::size_t vocab_size, std::size_t max_len);

}  // namespace treezone
