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

#include <functional>
#include <span>

#include "treezone/embeddings.hpp"
#include "treezone/training/config.hpp"
#include "treezone/training/evaluate.hpp"
#include "treezone/treebank.hpp"
#include "treezone/treelstm.hpp"

namespace treezone {

template <std::floating_point T>
struct TrainResult {
  TreeLstmModel<T> model;
  /// Train-set accuracy of the returned model, per-epoch mean node loss,
  /// training wall-clock.
  MetricsReport report;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Freshly initialized model for `config` over the forms of `vocab_banks`.
template <std::floating_point T>
TreeLstmModel<T> initial_model(const TrainConfig& config, const EmbeddingStore& store,
                               std::span<const Treebank* const> vocab_banks);

/// Minibatch training. Sentences are reshuffled every epoch; each batch
/// gradient is the mean over its sentences plus one L2 term. After every
/// epoch a snapshot is taken and the last `ensemble_epochs` are averaged
/// into the returned model. Fully determined by (config, data, store).
///
/// `extra_vocab` lists treebanks whose forms should also get embedding
/// rows (typically the evaluation set).
template <std::floating_point T>
TrainResult<T> train(const TrainConfig& config, const Treebank& data, const EmbeddingStore& store,
                     std::span<const Treebank* const> extra_vocab = {},
                     const EpochCallback& on_epoch = {});

}  // namespace treezone
