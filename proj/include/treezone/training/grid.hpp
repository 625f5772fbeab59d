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
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treezone/embeddings.hpp"
#include "treezone/training/config.hpp"
#include "treezone/treebank.hpp"

namespace treezone {

/// One hyperparameter and the values to try, as config strings.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses `key=v1,v2,...`.
GridAxis parse_axis(std::string_view spec);

struct GridRow {
  TrainConfig config;
  std::vector<std::pair<std::string, std::string>> settings;  // axis key -> value
  double accuracy = 0.0;
  double seconds = 0.0;
  std::string error;  // non-empty if the cell failed

  bool failed() const { return !error.empty(); }
};

/// Seed for a cell: the base seed when the cell changes nothing,
/// otherwise derived from the base seed and the cell's settings (so a
/// cell's seed does not depend on which other values are in the grid).
/// An explicit `seed` axis is used as given.
std::uint64_t cell_seed(std::uint64_t base,
                        const std::vector<std::pair<std::string, std::string>>& settings);

/// The Cartesian product of `axes` applied over `base`, in row-major
/// order (last axis fastest).
std::vector<GridRow> expand_grid(const TrainConfig& base, std::span<const GridAxis> axes);

/// Trains every cell on `train_set` and scores it on `eval_set`. Cells run
/// on up to `workers` threads; a failing cell is recorded and the rest
/// continue. Rows come back sorted by ascending accuracy, failures last.
///
/// Scoring on the evaluation set that also guides the search is not a
/// blind protocol; hold out a separate test set when that matters.
template <std::floating_point T>
std::vector<GridRow> grid_search(const TrainConfig& base, std::span<const GridAxis> axes,
                                 const Treebank& train_set, const Treebank& eval_set,
                                 const EmbeddingStore& store, std::size_t workers = 1);

/// Tab-separated table: mask, strategy, rate_c, rate_h, any other axes,
/// accuracy; plus a status column when some cell failed.
void write_grid_table(std::ostream& out, std::span<const GridRow> rows,
                      std::span<const GridAxis> axes);

}  // namespace treezone
