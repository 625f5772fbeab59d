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

#include <span>

#include "treezone/numcore/tape.hpp"

namespace treezone {

/// Mean softmax cross-entropy over the nodes of one tree.
template <std::floating_point T>
Var<T> mean_node_loss(std::span<const Var<T>> logits, std::span<const std::size_t> gold);

/// l2 * sum of squared entries of `weights`.
template <std::floating_point T>
Var<T> l2_penalty(Tape<T>& tape, std::span<Parameter<T>* const> weights, T l2);

/// Mean node loss plus the L2 penalty. With l2 == 0 or no weights the
/// penalty is omitted.
template <std::floating_point T>
Var<T> tree_loss(std::span<const Var<T>> logits, std::span<const std::size_t> gold,
                 std::span<Parameter<T>* const> weights, T l2);

}  // namespace treezone
