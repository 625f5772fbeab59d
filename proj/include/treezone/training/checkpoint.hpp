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

#include <iosfwd>
#include <string>

#include "treezone/training/config.hpp"
#include "treezone/treelstm.hpp"

namespace treezone {

// Checkpoint layout (all integers little-endian):
//
//   magic      8 bytes  "TREEZONE"
//   version    u32      kCheckpointVersion
//   manifest   u64 length + UTF-8 JSON
//                {format_version, hidden, input_dim, classes,
//                 vocabulary: [...], config: {key: value, ...}}
//   count      u32      number of tensors
//   tensor     u32 name length + name, u32 rank, u64 per dimension,
//              then row-major float32 values
//
// Values are stored at 32-bit precision whatever the model's precision.

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <std::floating_point T>
void save_checkpoint(std::ostream& out, const TreeLstmModel<T>& model, const TrainConfig& config);

template <std::floating_point T>
void save_checkpoint_file(const std::string& path, const TreeLstmModel<T>& model,
                          const TrainConfig& config);

template <std::floating_point T>
struct LoadedModel {
  TreeLstmModel<T> model;
  TrainConfig config;
};

/// Throws FormatError on a malformed or inconsistent checkpoint.
template <std::floating_point T>
LoadedModel<T> load_checkpoint(std::istream& in);

template <std::floating_point T>
LoadedModel<T> load_checkpoint_file(const std::string& path);

/// The model with every value rounded through float32, as it would be
/// after a save/load cycle.
template <std::floating_point T>
TreeLstmModel<float> to_float32(const TreeLstmModel<T>& model);

}  // namespace treezone
