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

#include "treezone/training/optimizer.hpp"

#include <cmath>

namespace treezone {

template <std::floating_point T>
void Optimizer<T>::step(std::span<const ParamSlot<T>> params) {
  ++steps_;
  const double bias1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(steps_));
  const double bias2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(steps_));
  const T eps = static_cast<T>(settings_.epsilon);

  for (const ParamSlot<T>& slot : params) {
    Parameter<T>& p = *slot.param;
    if (slot.lr == 0.0) {
      p.zero_grad();
      continue;
    }
    const T lr = static_cast<T>(slot.lr);
    auto w = p.value.data();
    const auto g = p.grad.data();

    if (settings_.weight_decay != 0.0) {
      const T decay = lr * static_cast<T>(settings_.weight_decay);
      for (T& x : w) x -= decay * x;
    }

    Slot& s = state_[&p];
    if (s.first.shape() != p.value.shape()) {
      s.first = Tensor<T>(p.value.shape());
      if (settings_.kind == OptimizerKind::Adam) s.second = Tensor<T>(p.value.shape());
    }
    auto m = s.first.data();
    if (settings_.kind == OptimizerKind::Adagrad) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] += g[i] * g[i];
        w[i] -= lr * g[i] / (std::sqrt(m[i]) + eps);
      }
    } else {
      auto v = s.second.data();
      const T b1 = static_cast<T>(settings_.beta1), b2 = static_cast<T>(settings_.beta2);
      const T c1 = static_cast<T>(bias1), c2 = static_cast<T>(bias2);
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = b1 * m[i] + (T{1} - b1) * g[i];
        v[i] = b2 * v[i] + (T{1} - b2) * g[i] * g[i];
        const T m_hat = m[i] / c1;
        const T v_hat = v[i] / c2;
        w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
    }
    p.zero_grad();
  }
}

template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace treezone
