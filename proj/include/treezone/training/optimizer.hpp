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
#include <span>
#include <unordered_map>

#include "treezone/numcore/tensor.hpp"
#include "treezone/training/config.hpp"

namespace treezone {

/// A parameter together with the learning rate it trains at. A rate of
/// zero leaves the parameter untouched.
template <std::floating_point T>
struct ParamSlot {
  Parameter<T>* param;
  double lr;
};

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::Adagrad;
  double weight_decay = 0.0;
  double epsilon = 1e-8;
  double beta1 = 0.9;
  double beta2 = 0.999;

  static OptimizerSettings from(const TrainConfig& c) {
    return {c.optimizer, c.weight_decay, c.epsilon, c.beta1, c.beta2};
  }
};

/// Adagrad or Adam with decoupled weight decay.
///
/// Per parameter, in order:
///   decay:    w -= lr * weight_decay * w
///   adagrad:  acc += g^2;  w -= lr * g / (sqrt(acc) + eps)
///   adam:     bias-corrected first/second moments, w -= lr * m^ / (sqrt(v^) + eps)
/// Gradients are zeroed afterwards, including those of frozen slots.
template <std::floating_point T>
class Optimizer {
 public:
  struct Slot {
    Tensor<T> first;   // adagrad accumulator, or adam first moment
    Tensor<T> second;  // adam second moment
  };

  explicit Optimizer(OptimizerSettings settings) : settings_(settings) {}

  void step(std::span<const ParamSlot<T>> params);

  std::size_t steps() const { return steps_; }
  const OptimizerSettings& settings() const { return settings_; }
  const Slot* state_of(const Parameter<T>* p) const {
    auto it = state_.find(p);
    return it == state_.end() ? nullptr : &it->second;
  }

 private:
  OptimizerSettings settings_;
  std::unordered_map<const Parameter<T>*, Slot> state_;
  std::size_t steps_ = 0;
};

}  // namespace treezone
