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

#include <cmath>

#include "treezone/errors.hpp"
#include "treezone/treelstm.hpp"

// Sequential LSTM over a list of inputs. Kept deliberately naive: it
// shares no code with the tape or the kernels, so agreement with the
// tree cell on single-child chains is an independent check of both.

namespace treezone {

namespace {

template <typename T>
std::vector<T> affine(const GateParams<T>& g, const Tensor<T>& x, const Tensor<T>& h) {
  const std::size_t hidden = g.bias.value.size();
  const std::size_t input = x.size();
  std::vector<T> z(hidden);
  for (std::size_t r = 0; r < hidden; ++r) {
    T wx{0}, uh{0};
    for (std::size_t c = 0; c < input; ++c) wx += g.input_weights.value.at(r, c) * x[c];
    for (std::size_t c = 0; c < hidden; ++c) uh += g.hidden_weights.value.at(r, c) * h[c];
    z[r] = wx + uh + g.bias.value[r];
  }
  return z;
}

template <typename T>
T logistic(T v) {
  return T{1} / (T{1} + std::exp(-v));
}

}  // namespace

template <std::floating_point T>
std::vector<StateValues<T>> seq_forward(const LstmWeights<T>& p, std::span<const Tensor<T>> xs) {
  const std::size_t hidden = p.hidden_size();
  Tensor<T> h({hidden}), c({hidden});
  std::vector<StateValues<T>> states;
  states.reserve(xs.size());
  for (const Tensor<T>& x : xs) {
    if (x.size() != p.input_size()) {
      throw DimensionError("seq_forward: input of length " + std::to_string(x.size()) +
                           ", expected " + std::to_string(p.input_size()));
    }
    const auto zi = affine(p.input_gate, x, h);
    const auto zf = affine(p.forget_gate, x, h);
    const auto zo = affine(p.output_gate, x, h);
    const auto zu = affine(p.update, x, h);
    Tensor<T> c_next({hidden}), h_next({hidden});
    for (std::size_t r = 0; r < hidden; ++r) {
      c_next[r] = logistic(zf[r]) * c[r] + logistic(zi[r]) * std::tanh(zu[r]);
      h_next[r] = logistic(zo[r]) * std::tanh(c_next[r]);
    }
    h = h_next;
    c = c_next;
    states.push_back({std::move(h_next), std::move(c_next)});
  }
  return states;
}

template std::vector<StateValues<float>> seq_forward<float>(const LstmWeights<float>&,
                                                           std::span<const Tensor<float>>);
template std::vector<StateValues<double>> seq_forward<double>(const LstmWeights<double>&,
                                                             std::span<const Tensor<double>>);

}  // namespace treezone
