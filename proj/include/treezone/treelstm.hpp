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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treezone/embeddings.hpp"
#include "treezone/numcore/tape.hpp"
#include "treezone/rng.hpp"
#include "treezone/treebank.hpp"

namespace treezone {

// ---------------------------------------------------------------------------
// Zoneout configuration

enum class ZoneoutStrategy { None, SumChild, ChooseChild };
enum class MaskScope { Common, Distinct };
enum class Mode { Train, Eval };

std::string to_string(ZoneoutStrategy s);
std::string to_string(MaskScope s);
ZoneoutStrategy parse_strategy(std::string_view s);
MaskScope parse_mask_scope(std::string_view s);

/// Rates are the probability that a coordinate is zoned out, i.e. that
/// it takes the substitute value instead of the freshly computed one.
struct ZoneoutConfig {
  ZoneoutStrategy strategy = ZoneoutStrategy::None;
  MaskScope scope = MaskScope::Distinct;
  double rate_c = 0.0;
  double rate_h = 0.0;
  Mode mode = Mode::Train;
  /// Eval mode normally returns the fresh state. With this set it mixes
  /// in the substitute by its expected weight instead.
  bool eval_expectation = false;

  void validate() const;
  bool enabled() const { return strategy != ZoneoutStrategy::None; }
  ZoneoutConfig in_mode(Mode m) const {
    ZoneoutConfig z = *this;
    z.mode = m;
    return z;
  }
};

// ---------------------------------------------------------------------------
// Parameters

template <std::floating_point T>
struct GateParams {
  Parameter<T> input_weights;   // [hidden x input]
  Parameter<T> hidden_weights;  // [hidden x hidden]
  Parameter<T> bias;            // [hidden]
};

/// Weights of one LSTM cell: input, forget and output gates plus the
/// candidate update. Used by both the tree cell and the sequential
/// reference cell.
template <std::floating_point T>
struct LstmWeights {
  GateParams<T> input_gate;
  GateParams<T> forget_gate;
  GateParams<T> output_gate;
  GateParams<T> update;

  std::size_t hidden_size() const { return input_gate.bias.value.size(); }
  std::size_t input_size() const { return input_gate.input_weights.value.cols(); }

  /// uniform(-1/sqrt(hidden), 1/sqrt(hidden)) weights, zero biases except
  /// the forget gate, which starts at 1.
  static LstmWeights init(std::size_t hidden, std::size_t input, Rng& rng);

  std::vector<Parameter<T>*> parameters();
};

template <std::floating_point T>
using TreeLstmParams = LstmWeights<T>;
template <std::floating_point T>
using SeqLstmParams = LstmWeights<T>;

template <std::floating_point T>
struct OutputLayer {
  Parameter<T> weights;  // [classes x hidden]
  Parameter<T> bias;     // [classes]

  static OutputLayer init(std::size_t classes, std::size_t hidden, Rng& rng);
  std::vector<Parameter<T>*> parameters() { return {&weights, &bias}; }
};

struct CellOptions {
  /// Feed each child's own hidden state to its forget gate instead of
  /// the summed child state.
  bool per_child_forget_input = false;
  /// Embed tokens by their lemma column when present.
  bool use_lemmas = false;
};

/// Complete tree labeler: embedding table, Child-Sum cell, output layer.
template <std::floating_point T>
struct TreeLstmModel {
  LstmWeights<T> cell;
  OutputLayer<T> output;
  EmbeddingLayer<T> embedding;
  CellOptions options;

  std::size_t hidden_size() const { return cell.hidden_size(); }
  std::size_t input_size() const { return cell.input_size(); }

  /// Cell and output parameters, then the embedding matrix.
  std::vector<Parameter<T>*> parameters();
  /// Weight matrices subject to the L2 penalty (no biases, no embedding).
  std::vector<Parameter<T>*> weight_matrices();

  /// Adds rows for forms absent from the embedding table, looked up in
  /// `store`. Existing rows are untouched.
  void extend_vocabulary(const EmbeddingStore& store, const std::vector<std::string>& forms);
};

template <std::floating_point T>
TreeLstmModel<T> make_model(const EmbeddingStore& store, const std::vector<std::string>& vocab,
                            std::size_t hidden, double emb_lr, CellOptions options, Rng& rng);

/// Key used to find a token's embedding row.
const std::string& embedding_key(const Token& t, const CellOptions& options);

/// Forms (or lemmas) needed to embed every token of the treebanks, sorted.
std::vector<std::string> collect_vocabulary(std::span<const Treebank* const> banks,
                                            const CellOptions& options);

// ---------------------------------------------------------------------------
// Forward pass

template <std::floating_point T>
struct NodeState {
  Var<T> h;
  Var<T> c;
};

/// Plain (tape-free) state, produced by the sequential reference cell.
template <std::floating_point T>
struct StateValues {
  Tensor<T> h;
  Tensor<T> c;
};

/// Draws zoneout masks. With common scope one pair of masks is drawn per
/// tree in begin_tree(); with distinct scope every node draws afresh.
template <std::floating_point T>
class ZoneoutSampler {
 public:
  ZoneoutSampler(const ZoneoutConfig& config, std::size_t hidden, Rng& rng);

  void begin_tree();
  /// 1 = keep the fresh value, 0 = take the substitute.
  Tensor<T> cell_mask();
  Tensor<T> hidden_mask();
  std::size_t choose(std::size_t n_children) { return rng_.below(n_children); }

  const ZoneoutConfig& config() const { return config_; }

 private:
  Tensor<T> draw(double rate);

  ZoneoutConfig config_;
  std::size_t hidden_;
  Rng& rng_;
  Tensor<T> common_c_;
  Tensor<T> common_h_;
};

/// Replaces coordinates of `fresh` by the children's states per the
/// configured strategy. Leaves and eval mode pass through unchanged.
template <std::floating_point T>
NodeState<T> apply_zoneout(const NodeState<T>& fresh, std::span<const NodeState<T>> children,
                           ZoneoutSampler<T>& sampler);

/// One Child-Sum Tree-LSTM node update followed by zoneout.
template <std::floating_point T>
NodeState<T> forward_node(LstmWeights<T>& p, Var<T> x, std::span<const NodeState<T>> children,
                          ZoneoutSampler<T>& sampler, const CellOptions& options = {});

template <std::floating_point T>
struct TreeOutput {
  std::vector<Var<T>> logits;        // by token index - 1
  std::vector<NodeState<T>> states;  // by token index - 1

  /// [n x classes] copy of the logits.
  Tensor<T> logits_matrix() const;
};

/// Runs the cell bottom-up over a validated tree and applies the output
/// layer at every node.
template <std::floating_point T>
TreeOutput<T> forward_tree(Tape<T>& tape, TreeLstmModel<T>& model, const SentenceTree& tree,
                           ZoneoutSampler<T>& sampler);

/// Sequential LSTM from zero initial state, one state per input. Plain
/// loops with no tape; serves as an independent check of the tree cell.
template <std::floating_point T>
std::vector<StateValues<T>> seq_forward(const LstmWeights<T>& p, std::span<const Tensor<T>> xs);

/// Row-wise argmax, ties to the lowest class.
template <std::floating_point T>
std::vector<std::size_t> predict_labels(const Tensor<T>& logits);

}  // namespace treezone
