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

#include "treezone/training/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "treezone/errors.hpp"

namespace treezone {

std::string MetricsReport::wall_clock() const {
  const auto total = static_cast<long long>(std::llround(seconds));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld", total / 60, total % 60);
  return buf;
}

MetricsReport score_labels(const std::vector<std::vector<std::size_t>>& predicted,
                           const Treebank& gold) {
  if (predicted.size() != gold.size()) {
    throw DimensionError("predictions for " + std::to_string(predicted.size()) +
                         " sentences, treebank has " + std::to_string(gold.size()));
  }
  MetricsReport r;
  std::array<std::size_t, kNumClasses> tp{}, pred_count{}, gold_count{};
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& tokens = gold.sentences()[s].tokens();
    if (predicted[s].size() != tokens.size()) {
      throw DimensionError("sentence " + std::to_string(s + 1) + ": " +
                           std::to_string(predicted[s].size()) + " predictions for " +
                           std::to_string(tokens.size()) + " tokens");
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::size_t g = tokens[i].label(), p = predicted[s][i];
      ++gold_count[g];
      if (p < kNumClasses) ++pred_count[p];
      if (p == g) {
        ++tp[g];
        ++r.correct_nodes;
      }
      ++r.total_nodes;
    }
  }
  r.node_accuracy = r.total_nodes ? static_cast<double>(r.correct_nodes) / r.total_nodes : 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    r.precision[c] = pred_count[c] ? static_cast<double>(tp[c]) / pred_count[c] : 0.0;
    r.recall[c] = gold_count[c] ? static_cast<double>(tp[c]) / gold_count[c] : 0.0;
  }
  return r;
}

template <std::floating_point T>
std::vector<std::vector<std::size_t>> predict(const TreeLstmModel<T>& model, const Treebank& tb,
                                              const ZoneoutConfig& zoneout) {
  // Inference tapes never run backward(), so nothing is written through
  // the parameter pointers they hold.
  auto& m = const_cast<TreeLstmModel<T>&>(model);
  Rng rng(0);
  ZoneoutSampler<T> sampler(zoneout.in_mode(Mode::Eval), model.hidden_size(), rng);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(tb.size());
  for (const SentenceTree& s : tb.sentences()) {
    Tape<T> tape;
    const TreeOutput<T> result = forward_tree(tape, m, s, sampler);
    out.push_back(predict_labels(result.logits_matrix()));
  }
  return out;
}

template <std::floating_point T>
MetricsReport evaluate(const TreeLstmModel<T>& model, const Treebank& tb,
                       const ZoneoutConfig& zoneout) {
  const auto start = std::chrono::steady_clock::now();
  MetricsReport r = score_labels(predict(model, tb, zoneout), tb);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Treebank relabel(const Treebank& tb, const std::vector<std::vector<std::size_t>>& labels) {
  if (labels.size() != tb.size()) {
    throw DimensionError("labels for " + std::to_string(labels.size()) +
                         " sentences, treebank has " + std::to_string(tb.size()));
  }
  std::vector<SentenceTree> sentences;
  sentences.reserve(tb.size());
  for (std::size_t s = 0; s < tb.size(); ++s) {
    std::vector<Token> tokens = tb.sentences()[s].tokens();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      tokens[i].sentiment = class_to_sentiment(labels[s].at(i));
    }
    sentences.emplace_back(std::move(tokens));
  }
  return Treebank(std::move(sentences));
}

#define TREEZONE_INSTANTIATE(T)                                                           \
  template std::vector<std::vector<std::size_t>> predict<T>(const TreeLstmModel<T>&,      \
                                                            const Treebank&,              \
                                                            const ZoneoutConfig&);        \
  template MetricsReport evaluate<T>(const TreeLstmModel<T>&, const Treebank&,            \
                                     const ZoneoutConfig&);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
