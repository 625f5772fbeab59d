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

#include "treezone/numcore/tape.hpp"

#include <cmath>

#include "treezone/numcore/kernels.hpp"

namespace treezone {

namespace {

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

template <typename T>
void add_into(std::span<T> dst, std::span<const T> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

template <std::floating_point T>
void Tape<T>::check_open() const {
  if (consumed_) throw LifecycleError("tape already consumed by backward()");
}

template <std::floating_point T>
void Tape<T>::check_owner(const Var<T>& v) const {
  if (v.tape() != this) throw ContractError("Var belongs to a different tape");
}

template <std::floating_point T>
Var<T> Tape<T>::record(Op op, Tensor<T> value, std::size_t a, std::size_t b,
                       Tensor<T> aux, T factor) {
  check_open();
  Node n{op, a, b, std::move(value), std::move(aux), nullptr, 0, factor};
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  return record(Op::Constant, std::move(value), 0);
}

template <std::floating_point T>
Var<T> Tape<T>::param(Parameter<T>& p) {
  check_open();
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) {
    return Var<T>(this, it->second);
  }
  Var<T> v = record(Op::Param, p.value, 0);
  nodes_.back().param = &p;
  param_ids_.emplace(&p, v.id());
  return v;
}

template <std::floating_point T>
Var<T> Tape<T>::gather_row(Parameter<T>& p, std::size_t row) {
  if (p.value.rank() != 2 || row >= p.value.rows()) {
    throw DimensionError("gather_row: row " + std::to_string(row) +
                         " out of range for " + shape_string(p.value.shape()));
  }
  auto r = p.value.row(row);
  Var<T> v = record(Op::GatherRow,
                    Tensor<T>({r.size()}, std::vector<T>(r.begin(), r.end())), 0);
  nodes_.back().param = &p;
  nodes_.back().row = row;
  return v;
}

template <std::floating_point T>
Tensor<T>& Tape<T>::grad_of(std::vector<Tensor<T>>& grads, std::size_t id) {
  if (grads[id].empty()) grads[id] = Tensor<T>(nodes_[id].value.shape());
  return grads[id];
}

template <std::floating_point T>
void Tape<T>::backward(Var<T> root, const Visitor& on_visit) {
  check_open();
  check_owner(root);
  if (!root.value().is_scalar()) {
    throw ContractError("backward() root must be a scalar, got " +
                        shape_string(root.value().shape()));
  }
  consumed_ = true;

  std::vector<Tensor<T>> grads(nodes_.size());
  grads[root.id()] = Tensor<T>(root.value().shape(), T{1});

  for (std::size_t id = nodes_.size(); id-- > 0;) {
    if (on_visit) on_visit(id);
    if (grads[id].empty()) continue;
    const Node& n = nodes_[id];
    const Tensor<T>& g = grads[id];
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Param:
        add_into(n.param->grad.data(), g.data());
        break;
      case Op::GatherRow:
        add_into(n.param->grad.row(n.row), g.data());
        break;
      case Op::MatMul: {
        const Tensor<T>& a = nodes_[n.a].value;
        const Tensor<T>& b = nodes_[n.b].value;
        const std::size_t m = a.rows(), k = a.cols();
        const std::size_t cols = b.rank() == 1 ? 1 : b.cols();
        kernels::gemm<T>(kernels::Trans::No, kernels::Trans::Yes, m, k, cols,
                         g.data(), b.data(), grad_of(grads, n.a).data(), true);
        kernels::gemm<T>(kernels::Trans::Yes, kernels::Trans::No, k, cols, m,
                         a.data(), g.data(), grad_of(grads, n.b).data(), true);
        break;
      }
      case Op::Add:
        add_into(grad_of(grads, n.a).data(), g.data());
        add_into(grad_of(grads, n.b).data(), g.data());
        break;
      case Op::Hadamard: {
        const auto a = nodes_[n.a].value.data();
        const auto b = nodes_[n.b].value.data();
        auto ga = grad_of(grads, n.a).data();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * b[i];
        auto gb = grad_of(grads, n.b).data();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * a[i];
        break;
      }
      case Op::Sigmoid: {
        const auto y = n.value.data();
        auto ga = grad_of(grads, n.a).data();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * y[i] * (T{1} - y[i]);
        break;
      }
      case Op::Tanh: {
        const auto y = n.value.data();
        auto ga = grad_of(grads, n.a).data();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * (T{1} - y[i] * y[i]);
        break;
      }
      case Op::Scale: {
        auto ga = grad_of(grads, n.a).data();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * n.factor;
        break;
      }
      case Op::Sum: {
        auto ga = grad_of(grads, n.a).data();
        for (T& v : ga) v += g[0];
        break;
      }
      case Op::SumSquares: {
        const auto a = nodes_[n.a].value.data();
        auto ga = grad_of(grads, n.a).data();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += T{2} * g[0] * a[i];
        break;
      }
      case Op::Blend: {
        const auto mask = n.aux.data();
        auto ga = grad_of(grads, n.a).data();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * mask[i];
        auto gb = grad_of(grads, n.b).data();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * (T{1} - mask[i]);
        break;
      }
      case Op::SoftmaxXent: {
        // aux holds softmax(logits); the gold index rides in `factor`.
        const auto p = n.aux.data();
        const auto gold = static_cast<std::size_t>(n.factor);
        auto ga = grad_of(grads, n.a).data();
        for (std::size_t i = 0; i < ga.size(); ++i) {
          ga[i] += g[0] * (p[i] - (i == gold ? T{1} : T{0}));
        }
        break;
      }
    }
  }
}

template <std::floating_point T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& tape = *a.tape();
  tape.check_owner(b);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  const bool b_vec = bv.rank() == 1;
  if (av.rank() != 2 || bv.rank() > 2 || av.cols() != bv.rows()) {
    throw DimensionError("matmul: shape mismatch " + shape_string(av.shape()) +
                         " x " + shape_string(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = b_vec ? 1 : bv.cols();
  Tensor<T> out(b_vec ? Shape{m} : Shape{m, n});
  kernels::gemm<T>(kernels::Trans::No, kernels::Trans::No, m, n, k, av.data(),
                   bv.data(), out.data(), false);
  return tape.record(Tape<T>::Op::MatMul, std::move(out), a.id(), b.id());
}

template <std::floating_point T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& tape = *a.tape();
  tape.check_owner(b);
  require_same_shape("add", a.value(), b.value());
  Tensor<T> out = a.value();
  add_into(out.data(), b.value().data());
  return tape.record(Tape<T>::Op::Add, std::move(out), a.id(), b.id());
}

template <std::floating_point T>
Var<T> hadamard(Var<T> a, Var<T> b) {
  Tape<T>& tape = *a.tape();
  tape.check_owner(b);
  require_same_shape("hadamard", a.value(), b.value());
  Tensor<T> out = a.value();
  const auto bv = b.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return tape.record(Tape<T>::Op::Hadamard, std::move(out), a.id(), b.id());
}

template <std::floating_point T>
Var<T> sigmoid(Var<T> a) {
  Tensor<T> out(a.value().shape());
  kernels::sigmoid<T>(a.value().data(), out.data());
  return a.tape()->record(Tape<T>::Op::Sigmoid, std::move(out), a.id());
}

template <std::floating_point T>
Var<T> tanh(Var<T> a) {
  Tensor<T> out(a.value().shape());
  kernels::tanh<T>(a.value().data(), out.data());
  return a.tape()->record(Tape<T>::Op::Tanh, std::move(out), a.id());
}

template <std::floating_point T>
Var<T> scale(Var<T> a, T factor) {
  Tensor<T> out = a.value();
  for (T& v : out.data()) v *= factor;
  return a.tape()->record(Tape<T>::Op::Scale, std::move(out), a.id(), 0, {}, factor);
}

template <std::floating_point T>
Var<T> sum(Var<T> a) {
  T s{0};
  for (T v : a.value().data()) s += v;
  return a.tape()->record(Tape<T>::Op::Sum, Tensor<T>::scalar(s), a.id());
}

template <std::floating_point T>
Var<T> sum_squares(Var<T> a) {
  T s{0};
  for (T v : a.value().data()) s += v * v;
  return a.tape()->record(Tape<T>::Op::SumSquares, Tensor<T>::scalar(s), a.id());
}

template <std::floating_point T>
Var<T> blend(const Tensor<T>& mask, Var<T> a, Var<T> b) {
  Tape<T>& tape = *a.tape();
  tape.check_owner(b);
  require_same_shape("blend", a.value(), b.value());
  require_same_shape("blend mask", mask, a.value());
  Tensor<T> out(a.value().shape());
  const auto av = a.value().data();
  const auto bv = b.value().data();
  const auto m = mask.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    // Binary masks select exactly; fractional ones mix.
    if (m[i] == T{1}) {
      o[i] = av[i];
    } else if (m[i] == T{0}) {
      o[i] = bv[i];
    } else {
      o[i] = m[i] * av[i] + (T{1} - m[i]) * bv[i];
    }
  }
  return tape.record(Tape<T>::Op::Blend, std::move(out), a.id(), b.id(), mask);
}

template <std::floating_point T>
Tensor<T> softmax(const Tensor<T>& logits) {
  Tensor<T> p(logits.shape());
  const auto x = logits.data();
  T hi = x[0];
  for (T v : x) hi = std::max(hi, v);
  T z{0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(x[i] - hi);
    z += p[i];
  }
  for (T& v : p.data()) v /= z;
  return p;
}

template <std::floating_point T>
Var<T> softmax_cross_entropy(Var<T> logits, std::size_t gold) {
  const Tensor<T>& x = logits.value();
  if (x.rank() != 1) {
    throw DimensionError("softmax_cross_entropy: logits must be a vector, got " +
                         shape_string(x.shape()));
  }
  if (gold >= x.size()) {
    throw LabelError("gold class " + std::to_string(gold) + " out of range for " +
                     std::to_string(x.size()) + " classes");
  }
  T hi = x[0];
  for (T v : x.data()) hi = std::max(hi, v);
  T z{0};
  for (T v : x.data()) z += std::exp(v - hi);
  const T loss = std::log(z) - (x[gold] - hi);
  return logits.tape()->record(Tape<T>::Op::SoftmaxXent, Tensor<T>::scalar(loss),
                               logits.id(), 0, softmax(x), static_cast<T>(gold));
}

#define TREEZONE_INSTANTIATE(T)                                        \
  template class Tape<T>;                                              \
  template Var<T> matmul<T>(Var<T>, Var<T>);                           \
  template Var<T> add<T>(Var<T>, Var<T>);                              \
  template Var<T> hadamard<T>(Var<T>, Var<T>);                         \
  template Var<T> sigmoid<T>(Var<T>);                                  \
  template Var<T> tanh<T>(Var<T>);                                     \
  template Var<T> scale<T>(Var<T>, T);                                 \
  template Var<T> sum<T>(Var<T>);                                      \
  template Var<T> sum_squares<T>(Var<T>);                              \
  template Var<T> blend<T>(const Tensor<T>&, Var<T>, Var<T>);          \
  template Tensor<T> softmax<T>(const Tensor<T>&);                     \
  template Var<T> softmax_cross_entropy<T>(Var<T>, std::size_t);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
