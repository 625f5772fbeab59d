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

#include "treezone/training/trainer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>

#include "treezone/errors.hpp"
#include "treezone/training/loss.hpp"
#include "treezone/training/optimizer.hpp"
#include "treezone/training/snapshot.hpp"

namespace treezone {

namespace {

// Independent random streams per concern.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kZoneoutStream = 3;

}  // namespace

template <std::floating_point T>
TreeLstmModel<T> initial_model(const TrainConfig& config, const EmbeddingStore& store,
                               std::span<const Treebank* const> vocab_banks) {
  config.validate();
  Rng rng(derive_seed(config.seed, kInitStream));
  return make_model<T>(store, collect_vocabulary(vocab_banks, config.cell), config.hidden,
                       config.emb_lr, config.cell, rng);
}

template <std::floating_point T>
TrainResult<T> train(const TrainConfig& config, const Treebank& data, const EmbeddingStore& store,
                     std::span<const Treebank* const> extra_vocab, const EpochCallback& on_epoch) {
  if (data.empty()) throw DataError("training treebank is empty");
  const auto start = std::chrono::steady_clock::now();

  std::vector<const Treebank*> banks{&data};
  banks.insert(banks.end(), extra_vocab.begin(), extra_vocab.end());
  TrainResult<T> result{initial_model<T>(config, store, banks), {}};
  TreeLstmModel<T>& model = result.model;

  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  Rng zoneout_rng(derive_seed(config.seed, kZoneoutStream));
  ZoneoutSampler<T> sampler(config.zoneout.in_mode(Mode::Train), config.hidden, zoneout_rng);
  Optimizer<T> optimizer(OptimizerSettings::from(config));

  std::vector<ParamSlot<T>> slots;
  for (Parameter<T>* p : model.cell.parameters()) slots.push_back({p, config.lr});
  for (Parameter<T>* p : model.output.parameters()) slots.push_back({p, config.lr});
  slots.push_back({&model.embedding.matrix, config.emb_lr});
  const std::vector<Parameter<T>*> weights = model.weight_matrices();

  std::vector<std::vector<std::size_t>> gold(data.size());
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (const Token& t : data.sentences()[s].tokens()) gold[s].push_back(t.label());
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::deque<ParameterSet<T>> snapshots;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const T inv_batch = T{1} / static_cast<T>(end - begin);
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t s = order[b];
        Tape<T> tape;
        const TreeOutput<T> out = forward_tree(tape, model, data.sentences()[s], sampler);
        Var<T> loss = mean_node_loss<T>(out.logits, gold[s]);
        const double value = loss.value().item();
        if (!std::isfinite(value)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                             ", batch " + std::to_string(batch_index + 1) + ", sentence " +
                             std::to_string(s + 1));
        }
        epoch_loss += value;
        tape.backward(scale(loss, inv_batch));
      }
      if (config.l2 > 0.0) {
        Tape<T> tape;
        tape.backward(l2_penalty<T>(tape, weights, static_cast<T>(config.l2)));
      }
      optimizer.step(slots);
    }
    const double mean_loss = epoch_loss / static_cast<double>(data.size());
    result.report.epoch_losses.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch + 1, mean_loss);

    if (config.ensemble_epochs > 1) {
      snapshots.push_back(snapshot(model));
      if (snapshots.size() > config.ensemble_epochs) snapshots.pop_front();
    }
  }

  if (snapshots.size() > 1) {
    const std::vector<ParameterSet<T>> kept(snapshots.begin(), snapshots.end());
    restore(model, snapshot_average<T>(kept));
  }

  const std::vector<double> losses = std::move(result.report.epoch_losses);
  result.report = evaluate(model, data, config.zoneout);
  result.report.epoch_losses = losses;
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

#define TREEZONE_INSTANTIATE(T)                                                               \
  template TreeLstmModel<T> initial_model<T>(const TrainConfig&, const EmbeddingStore&,       \
                                             std::span<const Treebank* const>);               \
  template TrainResult<T> train<T>(const TrainConfig&, const Treebank&, const EmbeddingStore&, \
                                   std::span<const Treebank* const>, const EpochCallback&);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
