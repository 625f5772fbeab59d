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

#include "treezone/training/snapshot.hpp"

namespace treezone {

template <std::floating_point T>
ParameterSet<T> snapshot(std::span<Parameter<T>* const> params) {
  ParameterSet<T> out;
  for (const Parameter<T>* p : params) out.emplace(p->name, p->value);
  return out;
}

template <std::floating_point T>
void restore(std::span<Parameter<T>* const> params, const ParameterSet<T>& set) {
  for (Parameter<T>* p : params) {
    auto it = set.find(p->name);
    if (it == set.end()) throw DimensionError("snapshot has no parameter '" + p->name + "'");
    if (it->second.shape() != p->value.shape()) {
      throw DimensionError("snapshot parameter '" + p->name + "' has shape " +
                           shape_string(it->second.shape()) + ", model has " +
                           shape_string(p->value.shape()));
    }
    p->value = it->second;
  }
}

template <std::floating_point T>
ParameterSet<T> snapshot_average(std::span<const ParameterSet<T>> checkpoints) {
  if (checkpoints.empty()) throw ContractError("snapshot_average of no checkpoints");
  if (checkpoints.size() == 1) return checkpoints.front();

  ParameterSet<T> sum = checkpoints.front();
  for (std::size_t c = 1; c < checkpoints.size(); ++c) {
    const ParameterSet<T>& cp = checkpoints[c];
    if (cp.size() != sum.size()) {
      throw DimensionError("checkpoint " + std::to_string(c) + " has " +
                           std::to_string(cp.size()) + " parameters, expected " +
                           std::to_string(sum.size()));
    }
    for (auto& [name, acc] : sum) {
      auto it = cp.find(name);
      if (it == cp.end()) {
        throw DimensionError("checkpoint " + std::to_string(c) + " lacks '" + name + "'");
      }
      if (it->second.shape() != acc.shape()) {
        throw DimensionError("checkpoint " + std::to_string(c) + " parameter '" + name +
                             "' has shape " + shape_string(it->second.shape()) + ", expected " +
                             shape_string(acc.shape()));
      }
      auto a = acc.data();
      const auto b = it->second.data();
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    }
  }
  const T count = static_cast<T>(checkpoints.size());
  for (auto& [name, acc] : sum) {
    for (T& v : acc.data()) v /= count;
  }
  return sum;
}

#define TREEZONE_INSTANTIATE(T)                                                       \
  template ParameterSet<T> snapshot<T>(std::span<Parameter<T>* const>);               \
  template void restore<T>(std::span<Parameter<T>* const>, const ParameterSet<T>&);   \
  template ParameterSet<T> snapshot_average<T>(std::span<const ParameterSet<T>>);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
