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

#include "treezone/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace treezone {

template <std::floating_point T>
Tensor<T> finite_diff_grad(const std::function<T(const Tensor<T>&)>& f,
                           const Tensor<T>& at, T step) {
  if (!(step > T{0})) throw ContractError("finite_diff_grad: step must be positive");
  Tensor<T> x = at;
  Tensor<T> grad(at.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T orig = x[i];
    x[i] = orig + step;
    const T up = f(x);
    x[i] = orig - step;
    const T down = f(x);
    x[i] = orig;
    grad[i] = (up - down) / (T{2} * step);
  }
  return grad;
}

template <std::floating_point T>
double relative_error(const Tensor<T>& a, const Tensor<T>& b, double floor) {
  if (a.shape() != b.shape()) {
    throw DimensionError("relative_error: shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    diff += (x - y) * (x - y);
    na += x * x;
    nb += y * y;
  }
  if (diff == 0.0) return 0.0;
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

template <std::floating_point T>
std::vector<GradCheckEntry> check_parameter_gradients(
    std::span<Parameter<T>* const> params,
    const std::function<Var<T>(Tape<T>&)>& loss, T step) {
  zero_grads(params);
  {
    Tape<T> tape;
    tape.backward(loss(tape));
  }

  std::vector<GradCheckEntry> out;
  out.reserve(params.size());
  for (Parameter<T>* p : params) {
    const Tensor<T> original = p->value;
    auto f = [&](const Tensor<T>& x) {
      p->value = x;
      Tape<T> tape;
      return loss(tape).value().item();
    };
    Tensor<T> numeric = finite_diff_grad<T>(f, original, step);
    p->value = original;
    out.push_back({p->name, relative_error(p->grad, numeric)});
  }
  zero_grads(params);
  return out;
}

#define TREEZONE_INSTANTIATE(T)                                                  \
  template Tensor<T> finite_diff_grad<T>(const std::function<T(const Tensor<T>&)>&, \
                                         const Tensor<T>&, T);                   \
  template double relative_error<T>(const Tensor<T>&, const Tensor<T>&, double); \
  template std::vector<GradCheckEntry> check_parameter_gradients<T>(             \
      std::span<Parameter<T>* const>, const std::function<Var<T>(Tape<T>&)>&, T);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
