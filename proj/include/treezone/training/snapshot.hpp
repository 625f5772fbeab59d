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

#include <map>
#include <span>
#include <string>

#include "treezone/treelstm.hpp"

namespace treezone {

/// Parameter values by name.
template <std::floating_point T>
using ParameterSet = std::map<std::string, Tensor<T>>;

template <std::floating_point T>
ParameterSet<T> snapshot(std::span<Parameter<T>* const> params);

template <std::floating_point T>
ParameterSet<T> snapshot(TreeLstmModel<T>& model) {
  const auto params = model.parameters();
  return snapshot<T>(std::span<Parameter<T>* const>(params));
}

/// Copies values back by name. Every parameter must be present with a
/// matching shape.
template <std::floating_point T>
void restore(std::span<Parameter<T>* const> params, const ParameterSet<T>& set);

template <std::floating_point T>
void restore(TreeLstmModel<T>& model, const ParameterSet<T>& set) {
  const auto params = model.parameters();
  restore<T>(std::span<Parameter<T>* const>(params), set);
}

/// Elementwise arithmetic mean of shape-compatible checkpoints.
template <std::floating_point T>
ParameterSet<T> snapshot_average(std::span<const ParameterSet<T>> checkpoints);

}  // namespace treezone
