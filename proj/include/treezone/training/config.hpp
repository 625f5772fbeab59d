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
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treezone/embeddings.hpp"
#include "treezone/treelstm.hpp"

namespace treezone {

enum class OptimizerKind { Adagrad, Adam };

std::string to_string(OptimizerKind k);

/// Training hyperparameters. Defaults are the reported best settings:
/// minibatch 25, hidden 300, learning rate 0.05, weight decay and L2 both
/// 1e-4, Adagrad, fixed embeddings.
struct TrainConfig {
  std::size_t batch_size = 25;
  std::size_t hidden = 300;
  double lr = 0.05;
  double emb_lr = 0.0;
  double weight_decay = 1e-4;
  double l2 = 1e-4;
  OptimizerKind optimizer = OptimizerKind::Adagrad;
  double epsilon = 1e-8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  std::size_t ensemble_epochs = 1;
  ZoneoutConfig zoneout;
  CellOptions cell;
  /// Empty means: subword when a gram table is loaded, random otherwise.
  std::string oov_policy;
  /// Width of the random vectors used when no embedding file is given.
  std::size_t emb_dim = 300;

  /// Applies one `key = value` setting. Unknown keys and malformed
  /// values throw UsageError.
  void set(std::string_view key, std::string_view value);

  void validate() const;

  /// Every key with its canonical value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> items() const;

  static const std::vector<std::string>& keys();
};

/// Reads `key = value` lines (`#` comments, blank lines ignored) on top
/// of `base`.
TrainConfig parse_config(std::istream& in, TrainConfig base = {}, const std::string& source = "config");
TrainConfig load_config_file(const std::string& path, TrainConfig base = {});

/// Shortest round-tripping decimal form.
std::string format_double(double v);

}  // namespace treezone
