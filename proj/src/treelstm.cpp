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

#include "treezone/treelstm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "treezone/errors.hpp"

namespace treezone {

std::string to_string(ZoneoutStrategy s) {
  switch (s) {
    case ZoneoutStrategy::None:
      return "none";
    case ZoneoutStrategy::SumChild:
      return "sum_child";
    case ZoneoutStrategy::ChooseChild:
      return "choose_child";
  }
  return "?";
}

std::string to_string(MaskScope s) { return s == MaskScope::Common ? "common" : "distinct"; }

ZoneoutStrategy parse_strategy(std::string_view s) {
  if (s == "none" || s == "n/a") return ZoneoutStrategy::None;
  if (s == "sum_child" || s == "sum-child") return ZoneoutStrategy::SumChild;
  if (s == "choose_child" || s == "choose-child") return ZoneoutStrategy::ChooseChild;
  throw UsageError("unknown zoneout strategy '" + std::string(s) +
                   "' (expected none, sum_child or choose_child)");
}

MaskScope parse_mask_scope(std::string_view s) {
  if (s == "common") return MaskScope::Common;
  if (s == "distinct") return MaskScope::Distinct;
  throw UsageError("unknown mask scope '" + std::string(s) + "' (expected common or distinct)");
}

void ZoneoutConfig::validate() const {
  auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!in_unit(rate_c) || !in_unit(rate_h)) {
    throw UsageError("zoneout rates must lie in [0, 1], got rate_c=" + std::to_string(rate_c) +
                     " rate_h=" + std::to_string(rate_h));
  }
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
Parameter<T> uniform_param(std::string name, Shape shape, double bound, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (T& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  return Parameter<T>(std::move(name), std::move(t));
}

template <typename T>
GateParams<T> init_gate(const std::string& name, std::size_t hidden, std::size_t input,
                        double bias, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  GateParams<T> g;
  g.input_weights = uniform_param<T>(name + ".W", {hidden, input}, bound, rng);
  g.hidden_weights = uniform_param<T>(name + ".U", {hidden, hidden}, bound, rng);
  g.bias = Parameter<T>(name + ".b", Tensor<T>({hidden}, static_cast<T>(bias)));
  return g;
}

}  // namespace

template <std::floating_point T>
LstmWeights<T> LstmWeights<T>::init(std::size_t hidden, std::size_t input, Rng& rng) {
  LstmWeights<T> w;
  w.input_gate = init_gate<T>("input_gate", hidden, input, 0.0, rng);
  w.forget_gate = init_gate<T>("forget_gate", hidden, input, 1.0, rng);
  w.output_gate = init_gate<T>("output_gate", hidden, input, 0.0, rng);
  w.update = init_gate<T>("update", hidden, input, 0.0, rng);
  return w;
}

template <std::floating_point T>
std::vector<Parameter<T>*> LstmWeights<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (GateParams<T>* g : {&input_gate, &forget_gate, &output_gate, &update}) {
    out.push_back(&g->input_weights);
    out.push_back(&g->hidden_weights);
    out.push_back(&g->bias);
  }
  return out;
}

template <std::floating_point T>
OutputLayer<T> OutputLayer<T>::init(std::size_t classes, std::size_t hidden, Rng& rng) {
  OutputLayer<T> o;
  o.weights = uniform_param<T>("output.W", {classes, hidden},
                               1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  o.bias = Parameter<T>("output.b", Tensor<T>({classes}));
  return o;
}

template <std::floating_point T>
std::vector<Parameter<T>*> TreeLstmModel<T>::parameters() {
  std::vector<Parameter<T>*> out = cell.parameters();
  out.push_back(&output.weights);
  out.push_back(&output.bias);
  out.push_back(&embedding.matrix);
  return out;
}

template <std::floating_point T>
std::vector<Parameter<T>*> TreeLstmModel<T>::weight_matrices() {
  std::vector<Parameter<T>*> out;
  for (GateParams<T>* g : {&cell.input_gate, &cell.forget_gate, &cell.output_gate, &cell.update}) {
    out.push_back(&g->input_weights);
    out.push_back(&g->hidden_weights);
  }
  out.push_back(&output.weights);
  return out;
}

template <std::floating_point T>
void TreeLstmModel<T>::extend_vocabulary(const EmbeddingStore& store,
                                         const std::vector<std::string>& forms) {
  std::vector<std::string> missing;
  for (const std::string& f : forms) {
    if (!embedding.index.contains(f)) missing.push_back(f);
  }
  if (missing.empty()) return;
  if (store.dim() != input_size()) {
    throw DataError("embedding dimension mismatch: store has " + std::to_string(store.dim()) +
                    ", model expects " + std::to_string(input_size()));
  }
  const Tensor<T>& old = embedding.matrix.value;
  const std::size_t rows = old.rows() + missing.size(), dim = old.cols();
  std::vector<T> data(old.data().begin(), old.data().end());
  data.reserve(rows * dim);
  for (const std::string& f : missing) {
    for (double v : store.lookup(f)) data.push_back(static_cast<T>(v));
    embedding.index.emplace(f, embedding.forms.size());
    embedding.forms.push_back(f);
  }
  embedding.matrix = Parameter<T>("embedding", Tensor<T>({rows, dim}, std::move(data)));
}

template <std::floating_point T>
TreeLstmModel<T> make_model(const EmbeddingStore& store, const std::vector<std::string>& vocab,
                            std::size_t hidden, double emb_lr, CellOptions options, Rng& rng) {
  TreeLstmModel<T> m;
  m.embedding = build_embedding_layer<T>(store, vocab, emb_lr);
  m.cell = LstmWeights<T>::init(hidden, store.dim(), rng);
  m.output = OutputLayer<T>::init(kNumClasses, hidden, rng);
  m.options = options;
  return m;
}

const std::string& embedding_key(const Token& t, const CellOptions& options) {
  return options.use_lemmas && t.lemma ? *t.lemma : t.form;
}

std::vector<std::string> collect_vocabulary(std::span<const Treebank* const> banks,
                                            const CellOptions& options) {
  std::set<std::string> forms;
  for (const Treebank* tb : banks) {
    for (const SentenceTree& s : tb->sentences()) {
      for (const Token& t : s.tokens()) forms.insert(embedding_key(t, options));
    }
  }
  return {forms.begin(), forms.end()};
}

// ---------------------------------------------------------------------------

template <std::floating_point T>
ZoneoutSampler<T>::ZoneoutSampler(const ZoneoutConfig& config, std::size_t hidden, Rng& rng)
    : config_(config), hidden_(hidden), rng_(rng) {
  config_.validate();
}

template <std::floating_point T>
Tensor<T> ZoneoutSampler<T>::draw(double rate) {
  Tensor<T> mask({hidden_}, T{1});
  if (rate <= 0.0) return mask;
  for (T& m : mask.data()) m = rng_.bernoulli(rate) ? T{0} : T{1};
  return mask;
}

template <std::floating_point T>
void ZoneoutSampler<T>::begin_tree() {
  if (!config_.enabled() || config_.mode != Mode::Train) return;
  if (config_.scope == MaskScope::Common) {
    common_c_ = draw(config_.rate_c);
    common_h_ = draw(config_.rate_h);
  }
}

template <std::floating_point T>
Tensor<T> ZoneoutSampler<T>::cell_mask() {
  if (config_.scope == MaskScope::Common) {
    if (common_c_.empty()) begin_tree();
    return common_c_;
  }
  return draw(config_.rate_c);
}

template <std::floating_point T>
Tensor<T> ZoneoutSampler<T>::hidden_mask() {
  if (config_.scope == MaskScope::Common) {
    if (common_h_.empty()) begin_tree();
    return common_h_;
  }
  return draw(config_.rate_h);
}

template <std::floating_point T>
NodeState<T> apply_zoneout(const NodeState<T>& fresh, std::span<const NodeState<T>> children,
                           ZoneoutSampler<T>& sampler) {
  const ZoneoutConfig& z = sampler.config();
  if (!z.enabled() || children.empty()) return fresh;
  if (z.mode == Mode::Eval && !z.eval_expectation) return fresh;

  auto child_sum = [&](auto member) {
    Var<T> s = children[0].*member;
    for (std::size_t k = 1; k < children.size(); ++k) s = add(s, children[k].*member);
    return s;
  };

  Var<T> sub_c, sub_h;
  if (z.strategy == ZoneoutStrategy::SumChild) {
    sub_c = child_sum(&NodeState<T>::c);
    sub_h = child_sum(&NodeState<T>::h);
  } else if (z.mode == Mode::Eval) {
    // Expected value of a uniformly chosen child.
    const T inv = T{1} / static_cast<T>(children.size());
    sub_c = scale(child_sum(&NodeState<T>::c), inv);
    sub_h = scale(child_sum(&NodeState<T>::h), inv);
  } else {
    const NodeState<T>& chosen = children[sampler.choose(children.size())];
    sub_c = chosen.c;
    sub_h = chosen.h;
  }

  const std::size_t hidden = fresh.h.value().size();
  Tensor<T> mask_c, mask_h;
  if (z.mode == Mode::Eval) {
    mask_c = Tensor<T>({hidden}, static_cast<T>(1.0 - z.rate_c));
    mask_h = Tensor<T>({hidden}, static_cast<T>(1.0 - z.rate_h));
  } else {
    mask_c = sampler.cell_mask();
    mask_h = sampler.hidden_mask();
  }
  NodeState<T> out = fresh;
  if (z.rate_c > 0.0) out.c = blend(mask_c, fresh.c, sub_c);
  if (z.rate_h > 0.0) out.h = blend(mask_h, fresh.h, sub_h);
  return out;
}

namespace {

template <typename T>
Var<T> gate_preactivation(Tape<T>& tape, GateParams<T>& g, Var<T> x, const Var<T>* h) {
  Var<T> z = matmul(tape.param(g.input_weights), x);
  if (h) z = add(z, matmul(tape.param(g.hidden_weights), *h));
  return add(z, tape.param(g.bias));
}

}  // namespace

template <std::floating_point T>
NodeState<T> forward_node(LstmWeights<T>& p, Var<T> x, std::span<const NodeState<T>> children,
                          ZoneoutSampler<T>& sampler, const CellOptions& options) {
  Tape<T>& tape = *x.tape();
  const std::size_t hidden = p.hidden_size();
  if (x.value().rank() != 1 || x.value().size() != p.input_size()) {
    throw DimensionError("forward_node: input " + shape_string(x.value().shape()) +
                         " does not match input size " + std::to_string(p.input_size()));
  }
  for (const NodeState<T>& ch : children) {
    if (ch.h.value().shape() != Shape{hidden} || ch.c.value().shape() != Shape{hidden}) {
      throw DimensionError("forward_node: child state " + shape_string(ch.h.value().shape()) +
                           "/" + shape_string(ch.c.value().shape()) + " vs hidden size " +
                           std::to_string(hidden));
    }
  }

  // Summed child hidden state; absent for leaves, where U * 0 vanishes.
  std::optional<Var<T>> h_sum;
  for (const NodeState<T>& ch : children) h_sum = h_sum ? add(*h_sum, ch.h) : ch.h;
  const Var<T>* hs = h_sum ? &*h_sum : nullptr;

  Var<T> i = sigmoid(gate_preactivation(tape, p.input_gate, x, hs));
  Var<T> o = sigmoid(gate_preactivation(tape, p.output_gate, x, hs));
  Var<T> u = tanh(gate_preactivation(tape, p.update, x, hs));

  Var<T> c = hadamard(i, u);
  if (!children.empty()) {
    std::optional<Var<T>> shared_f;
    if (!options.per_child_forget_input) {
      shared_f = sigmoid(gate_preactivation(tape, p.forget_gate, x, hs));
    }
    for (const NodeState<T>& ch : children) {
      Var<T> f = shared_f ? *shared_f
                          : sigmoid(gate_preactivation(tape, p.forget_gate, x, &ch.h));
      c = add(c, hadamard(f, ch.c));
    }
  }
  Var<T> h = hadamard(o, tanh(c));
  return apply_zoneout(NodeState<T>{h, c}, children, sampler);
}

template <std::floating_point T>
Tensor<T> TreeOutput<T>::logits_matrix() const {
  if (logits.empty()) return {};
  const std::size_t k = logits.front().value().size();
  Tensor<T> out({logits.size(), k});
  for (std::size_t r = 0; r < logits.size(); ++r) {
    const auto v = logits[r].value().data();
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

template <std::floating_point T>
TreeOutput<T> forward_tree(Tape<T>& tape, TreeLstmModel<T>& model, const SentenceTree& tree,
                           ZoneoutSampler<T>& sampler) {
  const std::size_t n = tree.size();
  TreeOutput<T> out;
  out.states.resize(n);
  out.logits.resize(n);
  sampler.begin_tree();

  Var<T> w_out = tape.param(model.output.weights);
  Var<T> b_out = tape.param(model.output.bias);
  std::vector<NodeState<T>> kids;
  for (std::size_t node : bottom_up_order(tree)) {
    const Token& tok = tree.token(node);
    const std::string& key = embedding_key(tok, model.options);
    const auto row = model.embedding.row_of(key);
    if (!row) {
      throw DataError("token '" + key + "' (position " + std::to_string(node) +
                      ") is not in the model vocabulary");
    }
    Var<T> x = tape.gather_row(model.embedding.matrix, *row);
    kids.clear();
    for (std::size_t ch : tree.children(node)) kids.push_back(out.states[ch - 1]);
    out.states[node - 1] = forward_node<T>(model.cell, x, kids, sampler, model.options);
    out.logits[node - 1] = add(matmul(w_out, out.states[node - 1].h), b_out);
  }
  return out;
}

// ---------------------------------------------------------------------------

template <std::floating_point T>
std::vector<std::size_t> predict_labels(const Tensor<T>& logits) {
  std::vector<std::size_t> out;
  if (logits.empty()) return out;
  out.reserve(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    out.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

#define TREEZONE_INSTANTIATE(T)                                                                 \
  template struct LstmWeights<T>;                                                               \
  template struct OutputLayer<T>;                                                               \
  template struct TreeLstmModel<T>;                                                             \
  template struct TreeOutput<T>;                                                                \
  template class ZoneoutSampler<T>;                                                             \
  template TreeLstmModel<T> make_model<T>(const EmbeddingStore&, const std::vector<std::string>&, \
                                          std::size_t, double, CellOptions, Rng&);              \
  template NodeState<T> apply_zoneout<T>(const NodeState<T>&, std::span<const NodeState<T>>,    \
                                         ZoneoutSampler<T>&);                                   \
  template NodeState<T> forward_node<T>(LstmWeights<T>&, Var<T>, std::span<const NodeState<T>>, \
                                        ZoneoutSampler<T>&, const CellOptions&);                \
  template TreeOutput<T> forward_tree<T>(Tape<T>&, TreeLstmModel<T>&, const SentenceTree&,      \
                                         ZoneoutSampler<T>&);                                   \
  template std::vector<std::size_t> predict_labels<T>(const Tensor<T>&);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
