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

#include "treezone/treebank.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "treezone/errors.hpp"
#include "treezone/rng.hpp"

namespace treezone {

SentenceTree::SentenceTree(std::vector<Token> tokens)
    : tokens_(std::move(tokens)), children_(tokens_.size() + 1) {
  for (const Token& t : tokens_) {
    if (t.head <= tokens_.size() && t.head != t.index) {
      children_[t.head].push_back(t.index);
    }
  }
}

std::size_t SentenceTree::root() const {
  return children_.empty() || children_[0].empty() ? 0 : children_[0].front();
}

std::string ValidationReport::message() const {
  std::string s;
  for (const std::string& v : violations) {
    if (!s.empty()) s += "; ";
    s += v;
  }
  return s;
}

ValidationReport validate_tree(const SentenceTree& tree) {
  ValidationReport report;
  const std::size_t n = tree.size();
  if (n == 0) {
    report.violations.push_back("empty sentence");
    return report;
  }

  std::vector<std::size_t> roots;
  bool heads_in_range = true;
  for (std::size_t i = 1; i <= n; ++i) {
    const Token& t = tree.token(i);
    if (t.index != i) {
      report.violations.push_back("token " + std::to_string(i) + " has index " +
                                  std::to_string(t.index));
    }
    if (t.head == 0) {
      roots.push_back(i);
    } else if (t.head == i) {
      report.violations.push_back("self-loop at token " + std::to_string(i));
      heads_in_range = false;
    } else if (t.head > n) {
      report.violations.push_back("dangling head " + std::to_string(t.head) +
                                  " at token " + std::to_string(i));
      heads_in_range = false;
    }
  }
  if (roots.empty()) {
    report.violations.push_back("no root");
  } else if (roots.size() > 1) {
    std::string list;
    for (std::size_t r : roots) list += (list.empty() ? "" : ",") + std::to_string(r);
    report.violations.push_back("multiple roots (tokens " + list + ")");
  }

  // Follow heads from every token; anything that neither reaches 0 nor
  // falls off the sentence within n steps sits on a cycle.
  if (heads_in_range) {
    std::vector<std::size_t> cyclic;
    for (std::size_t i = 1; i <= n; ++i) {
      std::size_t cur = i;
      std::size_t steps = 0;
      while (cur != 0 && steps <= n) {
        cur = tree.token(cur).head;
        ++steps;
      }
      if (cur != 0) cyclic.push_back(i);
    }
    if (!cyclic.empty()) {
      std::string list;
      for (std::size_t c : cyclic) list += (list.empty() ? "" : ",") + std::to_string(c);
      report.violations.push_back("cycle: tokens " + list + " never reach the root");
    }
  }
  return report;
}

std::vector<std::size_t> bottom_up_order(const SentenceTree& tree) {
  std::vector<std::size_t> order;
  order.reserve(tree.size());
  // Iterative post-order from the root.
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  const std::size_t root = tree.root();
  if (root == 0) return order;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& kids = tree.children(node);
    if (next < kids.size()) {
      const std::size_t child = kids[next++];
      stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

Treebank::Treebank(std::vector<SentenceTree> sentences)
    : sentences_(std::move(sentences)) {
  for (const SentenceTree& s : sentences_) {
    for (const Token& t : s.tokens()) ++vocabulary_[t.form];
  }
}

std::size_t Treebank::node_count() const {
  std::size_t n = 0;
  for (const SentenceTree& s : sentences_) n += s.size();
  return n;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

bool parse_int(std::string_view s, long long& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

}  // namespace

Treebank parse_treebank(std::istream& in) {
  std::vector<SentenceTree> sentences;
  std::vector<Token> current;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (current.empty()) return;
    SentenceTree tree(std::move(current));
    current.clear();
    const ValidationReport report = validate_tree(tree);
    if (!report.ok()) throw TreeError(sentences.size() + 1, report.message());
    sentences.push_back(std::move(tree));
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;

    const auto fields = split_tabs(line);
    if (fields.size() != 5 && fields.size() != 6) {
      throw ParseError(line_no, "expected 5 or 6 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    Token t;
    long long value = 0;
    if (!parse_int(fields[0], value) || value < 1) {
      throw ParseError(line_no, "bad token index '" + std::string(fields[0]) + "'");
    }
    t.index = static_cast<std::size_t>(value);
    if (t.index != current.size() + 1) {
      throw ParseError(line_no, "token index " + std::to_string(t.index) +
                                    " out of sequence, expected " +
                                    std::to_string(current.size() + 1));
    }
    if (fields[1].empty()) throw ParseError(line_no, "empty form");
    t.form = std::string(fields[1]);
    if (!parse_int(fields[2], value) || value < 0) {
      throw ParseError(line_no, "bad head '" + std::string(fields[2]) + "'");
    }
    t.head = static_cast<std::size_t>(value);
    t.relation = std::string(fields[3]);
    if (!parse_int(fields[4], value) || value < -1 || value > 1) {
      throw ParseError(line_no, "sentiment must be -1, 0 or 1, got '" +
                                    std::string(fields[4]) + "'");
    }
    t.sentiment = static_cast<int>(value);
    if (fields.size() == 6) t.lemma = std::string(fields[5]);
    current.push_back(std::move(t));
  }
  flush();
  return Treebank(std::move(sentences));
}

Treebank parse_treebank_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open treebank file '" + path + "'");
  try {
    return parse_treebank(in);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const TreeError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_treebank(std::ostream& out, const Treebank& tb) {
  bool first = true;
  for (const SentenceTree& s : tb.sentences()) {
    if (!first) out << '\n';
    first = false;
    for (const Token& t : s.tokens()) {
      out << t.index << '\t' << t.form << '\t' << t.head << '\t' << t.relation << '\t'
          << t.sentiment;
      if (t.lemma) out << '\t' << *t.lemma;
      out << '\n';
    }
  }
}

std::string serialize_treebank(const Treebank& tb) {
  std::ostringstream out;
  write_treebank(out, tb);
  return out.str();
}

int planted_sentiment(std::size_t word_id) {
  if (word_id % 5 == 0) return 0;
  return word_id % 2 == 0 ? 1 : -1;
}

Treebank make_synthetic_treebank(std::uint64_t seed, std::size_t n_sentences,
                                 std::size_t vocab_size, std::size_t max_len) {
  if (n_sentences == 0 || vocab_size == 0 || max_len == 0) {
    throw UsageError("synthetic treebank parameters must be positive");
  }
  Rng rng(derive_seed(seed, 0x73796e7468ULL));
  std::vector<SentenceTree> sentences;
  sentences.reserve(n_sentences);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    const std::size_t n = 1 + rng.below(max_len);
    // Random recursive tree over a random visiting order: each token
    // after the first attaches to one already placed.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i + 1;
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> head(n + 1, 0);
    for (std::size_t i = 1; i < n; ++i) head[order[i]] = order[rng.below(i)];

    std::vector<Token> tokens(n);
    for (std::size_t i = 1; i <= n; ++i) {
      const std::size_t word = rng.below(vocab_size);
      Token& t = tokens[i - 1];
      t.index = i;
      t.form = "w" + std::to_string(word);
      t.head = head[i];
      t.relation = head[i] == 0 ? "root" : "dep";
      t.sentiment = planted_sentiment(word);
    }
    sentences.emplace_back(std::move(tokens));
  }
  return Treebank(std::move(sentences));
}

}  // namespace treezone
