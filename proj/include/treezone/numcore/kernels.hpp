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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

// Dense kernels behind the autodiff tape. Two implementations exist:
//
//   serial::    plain loops, the reference used by the tests
//   parallel::  OpenMP row-partitioned versions
//
// The unqualified entry points dispatch to parallel:: when the problem is
// large enough and we are not already inside a parallel region (grid
// search runs one training cell per thread). Each output element is
// reduced in the same order by both implementations, so results agree
// bit-for-bit on a given platform.

namespace treezone::kernels {

enum class Trans { No, Yes };

/// Work (m*n*k multiply-adds) below which dispatch stays serial.
inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 18;

namespace serial {

/// C(m x n) (+)= op(A)(m x k) * op(B)(k x n). A and B are stored
/// row-major in their untransposed layout.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate);

template <typename T>
void sigmoid(std::span<const T> x, std::span<T> y);

template <typename T>
void tanh(std::span<const T> x, std::span<T> y);

}  // namespace serial

namespace parallel {

template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate);

template <typename T>
void sigmoid(std::span<const T> x, std::span<T> y);

template <typename T>
void tanh(std::span<const T> x, std::span<T> y);

}  // namespace parallel

template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate);

template <typename T>
void sigmoid(std::span<const T> x, std::span<T> y);

template <typename T>
void tanh(std::span<const T> x, std::span<T> y);

/// Largest representable value below one.
template <typename T>
inline constexpr T kBelowOne = T{1} - std::numeric_limits<T>::epsilon() / T{2};

/// Logistic function, kept strictly inside (0, 1) even where the exact
/// value rounds to an endpoint.
template <typename T>
inline T sigmoid_scalar(T x) {
  T y;
  if (x >= T{0}) {
    y = T{1} / (T{1} + std::exp(-x));
  } else {
    const T e = std::exp(x);
    y = e / (T{1} + e);
  }
  return std::clamp(y, std::numeric_limits<T>::denorm_min(), kBelowOne<T>);
}

/// Hyperbolic tangent kept strictly inside (-1, 1).
template <typename T>
inline T tanh_scalar(T x) {
  return std::clamp(std::tanh(x), -kBelowOne<T>, kBelowOne<T>);
}

}  // namespace treezone::kernels
