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

#include <omp.h>

#include <vector>

#include "treezone/numcore/kernels.hpp"

namespace treezone::kernels::parallel {

// Rows of C are split across threads. Within a row the k-loop runs
// outermost so the inner loop streams a contiguous row of B; partial sums
// live in a row buffer and are folded into C once, which keeps the
// per-element reduction order identical to serial::gemm.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel
  {
    std::vector<T> acc(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::fill(acc.begin(), acc.end(), T{0});
      for (std::size_t p = 0; p < k; ++p) {
        const T av = ta == Trans::No ? a[i * k + p] : a[p * m + i];
        if (tb == Trans::No) {
          const T* brow = b.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) acc[j] += av * brow[j];
        } else {
          for (std::size_t j = 0; j < n; ++j) acc[j] += av * b[j * k + p];
        }
      }
      T* crow = c.data() + i * n;
      if (accumulate) {
        for (std::size_t j = 0; j < n; ++j) crow[j] += acc[j];
      } else {
        std::copy(acc.begin(), acc.end(), crow);
      }
    }
  }
}

template <typename T>
void sigmoid(std::span<const T> x, std::span<T> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = sigmoid_scalar(x[i]);
}

template <typename T>
void tanh(std::span<const T> x, std::span<T> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = tanh_scalar(x[i]);
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

}  // namespace treezone::kernels::parallel
