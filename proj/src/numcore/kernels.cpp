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

#include <omp.h>

namespace treezone::kernels {

namespace {

bool go_parallel(std::size_t work) {
  return work >= kParallelThreshold && !omp_in_parallel() &&
         omp_get_max_threads() > 1;
}

}  // namespace

template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate) {
  if (go_parallel(m * n * k)) {
    parallel::gemm(ta, tb, m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm(ta, tb, m, n, k, a, b, c, accumulate);
  }
}

template <typename T>
void sigmoid(std::span<const T> x, std::span<T> y) {
  if (go_parallel(x.size() * 64)) {
    parallel::sigmoid(x, y);
  } else {
    serial::sigmoid(x, y);
  }
}

template <typename T>
void tanh(std::span<const T> x, std::span<T> y) {
  if (go_parallel(x.size() * 64)) {
    parallel::tanh(x, y);
  } else {
    serial::tanh(x, y);
  }
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

}  // namespace treezone::kernels
