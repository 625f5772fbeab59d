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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "treezone/numcore/tape.hpp"

namespace treezone {

/// Central-difference gradient of f at `at`, one coordinate at a time.
template <std::floating_point T>
Tensor<T> finite_diff_grad(const std::function<T(const Tensor<T>&)>& f,
                           const Tensor<T>& at, T step);

/// ||a - b|| / max(||a||, ||b||, floor). Zero when both are exactly zero.
template <std::floating_point T>
double relative_error(const Tensor<T>& a, const Tensor<T>& b, double floor = 1e-8);

struct GradCheckEntry {
  std::string name;
  double rel_error = 0.0;
};

/// Builds the loss on a fresh tape via `loss` and compares backward()
/// against central differences for every element of every parameter.
/// Parameter values are restored afterwards; grads are left zeroed.
template <std::floating_point T>
std::vector<GradCheckEntry> check_parameter_gradients(
    std::span<Parameter<T>* const> params,
    const std::function<Var<T>(Tape<T>&)>& loss, T step);

}  // namespace treezone
