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

#include "treezone/training/loss.hpp"

namespace treezone {

template <std::floating_point T>
Var<T> mean_node_loss(std::span<const Var<T>> logits, std::span<const std::size_t> gold) {
  if (logits.size() != gold.size()) {
    throw DimensionError("tree loss: " + std::to_string(logits.size()) + " logit rows but " +
                         std::to_string(gold.size()) + " gold labels");
  }
  if (logits.empty()) throw ContractError("tree loss over an empty tree");
  Var<T> total = softmax_cross_entropy(logits[0], gold[0]);
  for (std::size_t j = 1; j < logits.size(); ++j) {
    total = add(total, softmax_cross_entropy(logits[j], gold[j]));
  }
  return scale(total, T{1} / static_cast<T>(logits.size()));
}

template <std::floating_point T>
Var<T> l2_penalty(Tape<T>& tape, std::span<Parameter<T>* const> weights, T l2) {
  if (weights.empty()) return tape.constant(Tensor<T>::scalar(T{0}));
  Var<T> total = sum_squares(tape.param(*weights[0]));
  for (std::size_t i = 1; i < weights.size(); ++i) {
    total = add(total, sum_squares(tape.param(*weights[i])));
  }
  return scale(total, l2);
}

template <std::floating_point T>
Var<T> tree_loss(std::span<const Var<T>> logits, std::span<const std::size_t> gold,
                 std::span<Parameter<T>* const> weights, T l2) {
  Var<T> loss = mean_node_loss(logits, gold);
  if (l2 == T{0} || weights.empty()) return loss;
  return add(loss, l2_penalty(*loss.tape(), weights, l2));
}

#define TREEZONE_INSTANTIATE(T)                                                         \
  template Var<T> mean_node_loss<T>(std::span<const Var<T>>, std::span<const std::size_t>); \
  template Var<T> l2_penalty<T>(Tape<T>&, std::span<Parameter<T>* const>, T);           \
  template Var<T> tree_loss<T>(std::span<const Var<T>>, std::span<const std::size_t>,   \
                               std::span<Parameter<T>* const>, T);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
