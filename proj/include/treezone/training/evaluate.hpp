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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "treezone/treebank.hpp"
#include "treezone/treelstm.hpp"

namespace treezone {

struct MetricsReport {
  double node_accuracy = 0.0;
  std::size_t correct_nodes = 0;
  std::size_t total_nodes = 0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::vector<double> epoch_losses;
  double seconds = 0.0;

  /// Wall-clock time as mm:ss.
  std::string wall_clock() const;
};

/// Accuracy, precision and recall of `predicted` against gold labels.
MetricsReport score_labels(const std::vector<std::vector<std::size_t>>& predicted,
                           const Treebank& gold);

/// Predicted class per node for every sentence, zoneout in eval mode.
/// The model is only read.
template <std::floating_point T>
std::vector<std::vector<std::size_t>> predict(const TreeLstmModel<T>& model, const Treebank& tb,
                                              const ZoneoutConfig& zoneout = {});

/// Node accuracy over every node of every sentence.
template <std::floating_point T>
MetricsReport evaluate(const TreeLstmModel<T>& model, const Treebank& tb,
                       const ZoneoutConfig& zoneout = {});

/// Copy of `tb` with each sentiment replaced by the prediction.
Treebank relabel(const Treebank& tb, const std::vector<std::vector<std::size_t>>& labels);

}  // namespace treezone
