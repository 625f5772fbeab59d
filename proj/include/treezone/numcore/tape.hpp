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
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "treezone/numcore/tensor.hpp"

namespace treezone {

template <std::floating_point T>
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while
/// the owning tape is alive.
template <std::floating_point T>
class Var {
 public:
  Var() = default;

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape<T>* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records differentiable operations in execution order. backward()
/// replays them in reverse, accumulating (+=) into every reachable
/// Parameter's grad, and consumes the tape.
template <std::floating_point T>
class Tape {
 public:
  enum class Op : std::uint8_t {
    Constant,
    Param,
    GatherRow,
    MatMul,
    Add,
    Hadamard,
    Sigmoid,
    Tanh,
    Scale,
    Sum,
    SumSquares,
    Blend,
    SoftmaxXent,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value);

  /// Leaf bound to a parameter. Repeated calls with the same parameter
  /// return the same leaf.
  Var<T> param(Parameter<T>& p);

  /// Row `row` of a matrix parameter as a vector; the backward pass
  /// scatters into that row of p.grad only.
  Var<T> gather_row(Parameter<T>& p, std::size_t row);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }
  Op op(std::size_t id) const { return nodes_.at(id).op; }
  const Tensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }

  using Visitor = std::function<void(std::size_t)>;

  /// Seeds d(root)/d(root) = 1 and propagates to every parameter.
  /// `on_visit` observes node ids in the order they are processed.
  void backward(Var<T> root, const Visitor& on_visit = {});

  // Operation recording. Prefer the free functions below.
  Var<T> record(Op op, Tensor<T> value, std::size_t a, std::size_t b = 0,
                Tensor<T> aux = {}, T factor = T{0});
  void check_open() const;
  void check_owner(const Var<T>& v) const;

 private:
  struct Node {
    Op op;
    std::size_t a = 0;
    std::size_t b = 0;
    Tensor<T> value;
    Tensor<T> aux;
    Parameter<T>* param = nullptr;
    std::size_t row = 0;
    T factor{0};
  };

  Tensor<T>& grad_of(std::vector<Tensor<T>>& grads, std::size_t id);

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_ids_;
  bool consumed_ = false;
};

template <std::floating_point T>
const Tensor<T>& Var<T>::value() const {
  if (!tape_) throw ContractError("value() on an unbound Var");
  return tape_->value(id_);
}

/// a[m x k] times b[k x n] (or b[k], giving [m]).
template <std::floating_point T>
Var<T> matmul(Var<T> a, Var<T> b);

template <std::floating_point T>
Var<T> add(Var<T> a, Var<T> b);

template <std::floating_point T>
Var<T> hadamard(Var<T> a, Var<T> b);

template <std::floating_point T>
Var<T> sigmoid(Var<T> a);

template <std::floating_point T>
Var<T> tanh(Var<T> a);

template <std::floating_point T>
Var<T> scale(Var<T> a, T factor);

/// Sum of all elements, as a scalar.
template <std::floating_point T>
Var<T> sum(Var<T> a);

template <std::floating_point T>
Var<T> sum_squares(Var<T> a);

/// mask * a + (1 - mask) * b with a constant mask.
template <std::floating_point T>
Var<T> blend(const Tensor<T>& mask, Var<T> a, Var<T> b);

/// -log softmax(logits)[gold], evaluated with max-subtraction.
template <std::floating_point T>
Var<T> softmax_cross_entropy(Var<T> logits, std::size_t gold);

/// Stable softmax of a plain vector.
template <std::floating_point T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace treezone
