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

#include "treezone/numcore/kernels.hpp"

namespace treezone::kernels::serial {

namespace {

template <typename T>
T elem(std::span<const T> m, Trans t, std::size_t r, std::size_t c,
       std::size_t rows, std::size_t cols) {
  // (r, c) of op(M) where op(M) is rows x cols.
  return t == Trans::No ? m[r * cols + c] : m[c * rows + r];
}

}  // namespace

template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T sum{0};
      for (std::size_t p = 0; p < k; ++p) {
        sum += elem(a, ta, i, p, m, k) * elem(b, tb, p, j, k, n);
      }
      c[i * n + j] = accumulate ? c[i * n + j] + sum : sum;
    }
  }
}

template <typename T>
void sigmoid(std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
}

template <typename T>
void tanh(std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = tanh_scalar(x[i]);
}

#define TREEZONE_INSTANTIATE(T)                                              \
  template void gemm<T>(Trans, Trans, std::size_t, std::size_t, std::size_t, \
                        std::span<const T>, std::span<const T>, std::span<T>, \
                        bool);                                               \
  template void sigmoid<T>(std::span<const T>, std::span<T>);                \
  template void tanh<T>(std::span<const T>, std::span<T>);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone::kernels::serial
