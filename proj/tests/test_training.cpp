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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "support.hpp"
#include "treezone/errors.hpp"
#include "treezone/numcore/gradcheck.hpp"
#include "treezone/training/checkpoint.hpp"
#include "treezone/training/config.hpp"
#include "treezone/training/evaluate.hpp"
#include "treezone/training/grid.hpp"
#include "treezone/training/loss.hpp"
#include "treezone/training/optimizer.hpp"
#include "treezone/training/snapshot.hpp"
#include "treezone/training/trainer.hpp"

using namespace treezone;
using treezone::testing::random_tensor;

namespace {

TrainConfig small_config(std::size_t epochs = 5) {
  TrainConfig c;
  c.hidden = 8;
  c.epochs = epochs;
  c.batch_size = 4;
  c.seed = 17;
  return c;
}

struct Synthetic {
  Treebank bank;
  EmbeddingStore store;
};

Synthetic synthetic(std::size_t sentences = 32, std::size_t vocab = 50, std::size_t dim = 50) {
  return {make_synthetic_treebank(3, sentences, vocab, 10), make_synthetic_store(3, vocab, dim)};
}

template <typename T>
bool same_parameters(TreeLstmModel<T>& a, TreeLstmModel<T>& b) {
  auto pa = a.parameters(), pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i]->name != pb[i]->name || !(pa[i]->value == pb[i]->value)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("loss") {
  TEST_CASE("uniform logits cost ln 3 per node") {
    Tape<double> tape;
    std::vector<Var<double>> logits{tape.constant(Tensor<double>({3})),
                                    tape.constant(Tensor<double>({3}))};
    const std::vector<std::size_t> gold{0, 2};
    CHECK(mean_node_loss<double>(logits, gold).value().item() ==
          doctest::Approx(std::log(3.0)).epsilon(1e-14));
  }

  TEST_CASE("confident correct logits leave only the L2 term") {
    Rng rng(1);
    Parameter<double> w("w", random_tensor<double>(rng, {3, 2}));
    std::vector<Parameter<double>*> weights{&w};
    double squares = 0.0;
    for (double v : w.value.data()) squares += v * v;
    Tape<double> tape;
    std::vector<Var<double>> logits{tape.constant(Tensor<double>::vector({0, 1000, 0}))};
    const std::vector<std::size_t> gold{1};
    const double total = tree_loss<double>(logits, gold, weights, 0.01).value().item();
    CHECK(total == doctest::Approx(0.01 * squares).epsilon(1e-12));
  }

  TEST_CASE("batch loss gradient matches central differences, and the trainer's split tapes agree") {
    Rng rng(2);
    const auto data = synthetic(2, 8, 4);
    TrainConfig c = small_config();
    c.hidden = 5;
    const Treebank* banks[] = {&data.bank};
    auto model = initial_model<double>(c, data.store, banks);
    auto params = model.parameters();
    auto weights = model.weight_matrices();
    std::vector<std::vector<std::size_t>> gold;
    for (const auto& s : data.bank.sentences()) {
      gold.emplace_back();
      for (const auto& t : s.tokens()) gold.back().push_back(t.label());
    }
    const double l2 = 1e-2;
    auto batch_loss = [&](Tape<double>& tape) {
      Rng zr(0);
      ZoneoutSampler<double> sampler({}, c.hidden, zr);
      Var<double> total;
      for (std::size_t s = 0; s < 2; ++s) {
        const auto out = forward_tree(tape, model, data.bank.sentences()[s], sampler);
        auto l = scale(mean_node_loss<double>(out.logits, gold[s]), 0.5);
        total = total.valid() ? add(total, l) : l;
      }
      return add(total, l2_penalty<double>(tape, weights, l2));
    };
    for (const auto& e : check_parameter_gradients<double>(params, batch_loss, 1e-5)) {
      CAPTURE(e.name);
      CHECK(e.rel_error < 1e-4);
    }

    // One tape per sentence plus a separate penalty tape gives the same sum.
    {
      Tape<double> tape;
      tape.backward(batch_loss(tape));
    }
    std::vector<Tensor<double>> joint;
    for (auto* p : params) joint.push_back(p->grad);
    zero_grads<double>(params);
    Rng zr(0);
    ZoneoutSampler<double> sampler({}, c.hidden, zr);
    for (std::size_t s = 0; s < 2; ++s) {
      Tape<double> tape;
      const auto out = forward_tree(tape, model, data.bank.sentences()[s], sampler);
      tape.backward(scale(mean_node_loss<double>(out.logits, gold[s]), 0.5));
    }
    {
      Tape<double> tape;
      tape.backward(l2_penalty<double>(tape, weights, l2));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      CHECK(testing::max_abs_diff(params[i]->grad, joint[i]) < 1e-14);
    }
  }

  TEST_CASE("the penalty covers weight matrices only") {
    Rng rng(3);
    const auto data = synthetic(1, 5, 3);
    const Treebank* banks[] = {&data.bank};
    auto model = initial_model<double>(small_config(), data.store, banks);
    for (auto* p : model.weight_matrices()) {
      CAPTURE(p->name);
      CHECK(p->value.rank() == 2);
      CHECK(p != &model.embedding.matrix);
    }
    CHECK(model.weight_matrices().size() == 9);
  }
}

TEST_SUITE("optimizer") {
  TEST_CASE("first Adagrad step with unit gradient moves by the learning rate") {
    Parameter<double> p("p", Tensor<double>::vector({0.0}));
    p.grad = Tensor<double>::vector({1.0});
    Optimizer<double> opt({OptimizerKind::Adagrad, 0.0, 1e-8});
    const std::vector<ParamSlot<double>> slots{{&p, 0.05}};
    opt.step(slots);
    CHECK(p.value[0] == doctest::Approx(-0.05 / (1.0 + 1e-8)).epsilon(1e-15));
    CHECK(p.grad[0] == 0.0);
    // Second step with the same gradient: accumulator 2.
    p.grad = Tensor<double>::vector({1.0});
    opt.step(slots);
    CHECK(p.value[0] == doctest::Approx(-0.05 / (1.0 + 1e-8) - 0.05 / (std::sqrt(2.0) + 1e-8)));
  }

  TEST_CASE("zero gradient without decay leaves parameters unchanged") {
    Rng rng(4);
    for (auto kind : {OptimizerKind::Adagrad, OptimizerKind::Adam}) {
      Parameter<double> p("p", random_tensor<double>(rng, {3, 3}));
      const auto before = p.value;
      Optimizer<double> opt({kind, 0.0});
      const std::vector<ParamSlot<double>> slots{{&p, 0.1}};
      for (int i = 0; i < 5; ++i) opt.step(slots);
      CHECK(p.value == before);
    }
  }

  TEST_CASE("hand-computed Adam steps") {
    Parameter<double> p("p", Tensor<double>::vector({1.0, -2.0}));
    Optimizer<double> opt({OptimizerKind::Adam, 0.0, 1e-8, 0.9, 0.999});
    const std::vector<ParamSlot<double>> slots{{&p, 0.01}};
    const double g1[] = {0.5, -4.0}, g2[] = {-1.0, 2.0};
    double w[] = {1.0, -2.0}, m[] = {0, 0}, v[] = {0, 0};
    int t = 0;
    for (const double* g : {g1, g2}) {
      ++t;
      p.grad = Tensor<double>::vector({g[0], g[1]});
      opt.step(slots);
      for (int i = 0; i < 2; ++i) {
        m[i] = 0.9 * m[i] + 0.1 * g[i];
        v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
        const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
        w[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
        CHECK(p.value[static_cast<std::size_t>(i)] == doctest::Approx(w[i]).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("decoupled weight decay shrinks before the adaptive step") {
    Parameter<double> p("p", Tensor<double>::vector({2.0}));
    p.grad = Tensor<double>::vector({0.0});
    Optimizer<double> opt({OptimizerKind::Adagrad, 0.1});
    const std::vector<ParamSlot<double>> slots{{&p, 0.5}};
    opt.step(slots);
    CHECK(p.value[0] == doctest::Approx(2.0 - 0.5 * 0.1 * 2.0).epsilon(1e-15));
  }

  TEST_CASE("zero learning rate freezes a slot bit for bit") {
    Rng rng(5);
    Parameter<double> frozen("embedding", random_tensor<double>(rng, {4, 3}));
    Parameter<double> live("w", random_tensor<double>(rng, {2}));
    const auto before = frozen.value;
    Optimizer<double> opt({OptimizerKind::Adagrad, 1e-4});
    const std::vector<ParamSlot<double>> slots{{&frozen, 0.0}, {&live, 0.05}};
    for (int i = 0; i < 20; ++i) {
      frozen.grad = random_tensor<double>(rng, {4, 3});
      live.grad = random_tensor<double>(rng, {2});
      opt.step(slots);
      CHECK(frozen.value == before);
      for (double g : frozen.grad.data()) CHECK(g == 0.0);
    }
    CHECK(opt.state_of(&frozen) == nullptr);
  }
}

TEST_SUITE("snapshots") {
  TEST_CASE("average of zeros and twos is ones") {
    ParameterSet<double> zeros{{"a", Tensor<double>({2, 2}, 0.0)}, {"b", Tensor<double>({3}, 0.0)}};
    ParameterSet<double> twos{{"a", Tensor<double>({2, 2}, 2.0)}, {"b", Tensor<double>({3}, 2.0)}};
    const std::vector<ParameterSet<double>> sets{zeros, twos};
    const auto avg = snapshot_average<double>(sets);
    CHECK(avg.at("a") == Tensor<double>({2, 2}, 1.0));
    CHECK(avg.at("b") == Tensor<double>({3}, 1.0));
  }

  TEST_CASE("a single checkpoint is returned unchanged") {
    Rng rng(6);
    ParameterSet<double> one{{"a", random_tensor<double>(rng, {3, 2})}};
    const std::vector<ParameterSet<double>> sets{one};
    CHECK(snapshot_average<double>(sets) == one);
  }

  TEST_CASE("average equals the brute-force elementwise mean, in any name order") {
    Rng rng(7);
    for (std::size_t k : {2u, 3u, 5u}) {
      std::vector<ParameterSet<double>> sets(k);
      for (auto& s : sets) {
        s["w"] = random_tensor<double>(rng, {3, 4});
        s["b"] = random_tensor<double>(rng, {4});
      }
      const auto avg = snapshot_average<double>(sets);
      for (const char* name : {"b", "w"}) {
        const auto& got = avg.at(name);
        for (std::size_t i = 0; i < got.size(); ++i) {
          double s = 0.0;
          for (const auto& set : sets) s += set.at(name)[i];
          CHECK(got[i] == s / static_cast<double>(k));
        }
      }
    }
  }

  TEST_CASE("mismatched shapes are rejected") {
    const std::vector<ParameterSet<double>> sets{{{"a", Tensor<double>({2})}},
                                                 {{"a", Tensor<double>({3})}}};
    CHECK_THROWS_AS(snapshot_average<double>(sets), DimensionError);
  }

  TEST_CASE("restore reinstates a snapshot") {
    const auto data = synthetic(4, 10, 4);
    const Treebank* banks[] = {&data.bank};
    auto model = initial_model<double>(small_config(), data.store, banks);
    const auto saved = snapshot(model);
    for (auto* p : model.parameters()) p->value.fill(0.5);
    restore(model, saved);
    CHECK(snapshot(model) == saved);
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("accuracy counts nodes over all sentences") {
    const Treebank gold({SentenceTree({{1, "a", 0, "x", 1, std::nullopt},
                                       {2, "b", 1, "x", 0, std::nullopt},
                                       {3, "c", 1, "x", -1, std::nullopt}}),
                         SentenceTree({{1, "a", 0, "x", 1, std::nullopt},
                                       {2, "b", 1, "x", 1, std::nullopt},
                                       {3, "c", 1, "x", 1, std::nullopt}})});
    std::vector<std::vector<std::size_t>> truth;
    for (const auto& s : gold.sentences()) {
      truth.emplace_back();
      for (const auto& t : s.tokens()) truth.back().push_back(t.label());
    }
    CHECK(score_labels(truth, gold).node_accuracy == 1.0);
    const std::vector<std::vector<std::size_t>> half{{2, 1, 1}, {2, 0, 0}};
    const auto r = score_labels(half, gold);
    CHECK(r.node_accuracy == 0.5);
    CHECK(r.correct_nodes == 3);
    CHECK(r.total_nodes == 6);
  }

  TEST_CASE("evaluation leaves the model untouched") {
    const auto data = synthetic(6, 12, 4);
    const Treebank* banks[] = {&data.bank};
    auto model = initial_model<double>(small_config(), data.store, banks);
    const auto before = snapshot(model);
    evaluate(model, data.bank);
    evaluate(model, data.bank, {ZoneoutStrategy::SumChild, MaskScope::Common, 0.5, 0.5});
    CHECK(snapshot(model) == before);
  }

  TEST_CASE("wall clock renders as minutes and seconds") {
    MetricsReport r;
    r.seconds = 1234.4;
    CHECK(r.wall_clock() == "20:34");
    r.seconds = 5.6;
    CHECK(r.wall_clock() == "00:06");
  }
}

TEST_SUITE("trainer") {
  TEST_CASE("zero epochs returns the initial model") {
    const auto data = synthetic(8, 20, 8);
    const auto c = small_config(0);
    const Treebank* banks[] = {&data.bank};
    auto init = initial_model<double>(c, data.store, banks);
    auto result = train<double>(c, data.bank, data.store);
    CHECK(same_parameters(result.model, init));
    CHECK(result.report.epoch_losses.empty());
  }

  TEST_CASE("same config and seed reproduce the loss sequence and weights") {
    const auto data = synthetic(12, 20, 8);
    auto c = small_config(4);
    c.zoneout = {ZoneoutStrategy::ChooseChild, MaskScope::Distinct, 0.2, 0.2};
    auto a = train<double>(c, data.bank, data.store);
    auto b = train<double>(c, data.bank, data.store);
    CHECK(a.report.epoch_losses == b.report.epoch_losses);
    CHECK(same_parameters(a.model, b.model));
    c.seed += 1;
    auto d = train<double>(c, data.bank, data.store);
    CHECK(a.report.epoch_losses != d.report.epoch_losses);
  }

  TEST_CASE("frozen embeddings stay bit-identical through training") {
    const auto data = synthetic(8, 20, 8);
    const auto c = small_config(3);
    const Treebank* banks[] = {&data.bank};
    auto init = initial_model<double>(c, data.store, banks);
    auto result = train<double>(c, data.bank, data.store);
    CHECK(result.model.embedding.matrix.value == init.embedding.matrix.value);
    auto live = c;
    live.emb_lr = 0.1;
    auto tuned = train<double>(live, data.bank, data.store);
    CHECK_FALSE(tuned.model.embedding.matrix.value == init.embedding.matrix.value);
  }

  TEST_CASE("snapshot ensembling averages the last epochs") {
    const auto data = synthetic(8, 20, 8);
    auto c = small_config(3);
    auto last = train<double>(c, data.bank, data.store);
    c.ensemble_epochs = 3;
    auto ens = train<double>(c, data.bank, data.store);
    CHECK(ens.report.epoch_losses == last.report.epoch_losses);
    CHECK_FALSE(same_parameters(ens.model, last.model));
    // Recompute the average by hand from runs of 1, 2 and 3 epochs.
    std::vector<ParameterSet<double>> per_epoch;
    for (std::size_t e = 1; e <= 3; ++e) {
      auto ce = small_config(e);
      auto run = train<double>(ce, data.bank, data.store);
      per_epoch.push_back(snapshot(run.model));
    }
    CHECK(snapshot(ens.model) == snapshot_average<double>(per_epoch));
  }

  TEST_CASE("planted rule is learned, with the loss settling after the first epochs") {
    const auto data = synthetic(32, 50);
    TrainConfig c;
    c.hidden = 32;
    c.epochs = 50;
    c.seed = 5;
    auto result = train<double>(c, data.bank, data.store);
    CHECK(result.report.node_accuracy >= 0.99);
    const auto& losses = result.report.epoch_losses;
    REQUIRE(losses.size() == 50);
    for (std::size_t e = 3; e + 1 < losses.size(); ++e) {
      CAPTURE(e);
      CHECK(losses[e + 1] <= losses[e]);
    }
    CHECK(losses.back() < 0.05);
  }

  TEST_CASE("a non-finite loss is a numeric error naming where it happened") {
    auto data = synthetic(4, 10, 4);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [form, count] : data.bank.vocabulary()) data.store.insert(form, {nan, 0, 0, 0});
    try {
      train<double>(small_config(3), data.bank, data.store);
      FAIL("expected a numeric error");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("epoch 1, batch 1") != std::string::npos);
    }
  }

  TEST_CASE("32-bit training runs and learns") {
    const auto data = synthetic(16, 20, 16);
    auto c = small_config(30);
    c.hidden = 16;
    auto result = train<float>(c, data.bank, data.store);
    CHECK(result.report.node_accuracy > 0.9);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults are the reported best settings") {
    const TrainConfig c;
    CHECK(c.batch_size == 25);
    CHECK(c.hidden == 300);
    CHECK(c.lr == 0.05);
    CHECK(c.emb_lr == 0.0);
    CHECK(c.weight_decay == 1e-4);
    CHECK(c.l2 == 1e-4);
    CHECK(c.optimizer == OptimizerKind::Adagrad);
  }

  TEST_CASE("config text overrides defaults and rejects unknown keys") {
    std::istringstream in("# tuned\nhidden = 50\n\nzoneout.strategy = choose_child\nzoneout.rate_h=0.2\n");
    const TrainConfig c = parse_config(in);
    CHECK(c.hidden == 50);
    CHECK(c.zoneout.strategy == ZoneoutStrategy::ChooseChild);
    CHECK(c.zoneout.rate_h == 0.2);
    std::istringstream bad("hidden = 5\nhiden = 6\n");
    try {
      parse_config(bad, {}, "my.cfg");
      FAIL("expected a usage error");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("my.cfg:2") != std::string::npos);
      CHECK(std::string(e.what()).find("hiden") != std::string::npos);
    }
    TrainConfig d;
    CHECK_THROWS_AS(d.set("lr", "fast"), UsageError);
    CHECK_THROWS_AS(d.set("optimizer", "sgd"), UsageError);
  }

  TEST_CASE("canonical items parse back to the same config") {
    TrainConfig c;
    c.set("lr", "0.1");
    c.set("zoneout.mask", "common");
    c.set("per_child_forget_input", "true");
    c.set("oov_policy", "zero");
    TrainConfig back;
    for (const auto& [k, v] : c.items()) back.set(k, v);
    CHECK(back.items() == c.items());
    CHECK(c.items().size() == TrainConfig::keys().size());
  }
}

TEST_SUITE("grid") {
  TEST_CASE("row count is the product of axis sizes") {
    const std::vector<GridAxis> axes{parse_axis("zoneout.rate_c=0,0.01"),
                                     parse_axis("zoneout.rate_h=0,0.01")};
    CHECK(expand_grid(TrainConfig{}, axes).size() == 4);
    const std::vector<GridAxis> zoneout_axes{parse_axis("zoneout.mask=common,distinct"),
                                       parse_axis("zoneout.strategy=sum_child,choose_child"),
                                       parse_axis("zoneout.rate_c=0.05,0.1,0.5"),
                                       parse_axis("zoneout.rate_h=0.05,0.1")};
    CHECK(expand_grid(TrainConfig{}, zoneout_axes).size() == 2 * 2 * 3 * 2);
  }

  TEST_CASE("bad axes are usage errors") {
    CHECK_THROWS_AS(parse_axis("zoneout.rate_c"), UsageError);
    CHECK_THROWS_AS(parse_axis("zoneout.rate_c=0.1,,0.2"), UsageError);
    CHECK_THROWS_AS(parse_axis("nonsense=1"), UsageError);
    CHECK_THROWS_AS(parse_axis("zoneout.rate_c=abc"), UsageError);
  }

  TEST_CASE("cell seeds depend on settings, not on position") {
    const std::vector<std::pair<std::string, std::string>> s{{"zoneout.rate_c", "0.1"}};
    CHECK(cell_seed(5, {}) == 5);
    CHECK(cell_seed(5, s) == cell_seed(5, s));
    CHECK(cell_seed(5, s) != cell_seed(6, s));
    CHECK(cell_seed(5, {{"seed", "42"}}) == 42);
  }

  TEST_CASE("empty grid equals a plain train and evaluate") {
    const auto data = synthetic(8, 20, 8);
    const auto c = small_config(3);
    const auto rows = grid_search<double>(c, {}, data.bank, data.bank, data.store);
    REQUIRE(rows.size() == 1);
    const Treebank* extra[] = {&data.bank};
    auto trained = train<double>(c, data.bank, data.store, extra);
    CHECK(rows[0].accuracy == evaluate(trained.model, data.bank).node_accuracy);
  }

  TEST_CASE("results do not depend on the worker count") {
    const auto data = synthetic(8, 20, 8);
    const std::vector<GridAxis> axes{parse_axis("zoneout.strategy=sum_child,choose_child"),
                                     parse_axis("zoneout.rate_h=0.1,0.3")};
    const auto one = grid_search<double>(small_config(2), axes, data.bank, data.bank, data.store, 1);
    const auto four = grid_search<double>(small_config(2), axes, data.bank, data.bank, data.store, 4);
    std::ostringstream a, b;
    write_grid_table(a, one, axes);
    write_grid_table(b, four, axes);
    CHECK(a.str() == b.str());
    for (std::size_t i = 1; i < one.size(); ++i) CHECK(one[i - 1].accuracy <= one[i].accuracy);
  }

  TEST_CASE("failing cells are reported, not fatal") {
    const auto data = synthetic(4, 10, 4);
    const std::vector<GridAxis> axes{parse_axis("zoneout.strategy=sum_child"),
                                     parse_axis("zoneout.rate_c=1.5,0.1")};
    const auto rows = grid_search<double>(small_config(1), axes, data.bank, data.bank, data.store);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].failed());
    CHECK(rows[1].failed());
    CHECK(rows[1].error.find("rate") != std::string::npos);
    std::ostringstream out;
    write_grid_table(out, rows, axes);
    CHECK(out.str().find("status") != std::string::npos);
  }

  TEST_CASE("table schema mirrors mask, strategy, rates, accuracy") {
    const auto data = synthetic(4, 10, 4);
    const std::vector<GridAxis> axes{parse_axis("zoneout.mask=common,distinct"),
                                     parse_axis("zoneout.strategy=sum_child,choose_child"),
                                     parse_axis("zoneout.rate_c=0.1"),
                                     parse_axis("zoneout.rate_h=0.2")};
    const auto rows = grid_search<double>(small_config(1), axes, data.bank, data.bank, data.store);
    std::ostringstream out;
    write_grid_table(out, rows, axes);
    std::istringstream lines(out.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "mask\tstrategy\trate_c\trate_h\taccuracy");
    std::size_t body = 0;
    for (std::string line; std::getline(lines, line);) {
      ++body;
      CHECK(std::count(line.begin(), line.end(), '\t') == 4);
      CHECK(line.find("\t0.10\t0.20\t") != std::string::npos);
    }
    CHECK(body == 4);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE_TEMPLATE("save and load round-trips values through float32", T, float, double) {
    const auto data = synthetic(6, 12, 5);
    auto c = small_config(2);
    c.zoneout = {ZoneoutStrategy::SumChild, MaskScope::Common, 0.1, 0.2};
    auto trained = train<T>(c, data.bank, data.store);
    std::stringstream io;
    save_checkpoint(io, trained.model, c);
    const auto loaded = load_checkpoint<T>(io);
    CHECK(loaded.config.items() == c.items());
    CHECK(loaded.model.embedding.forms == trained.model.embedding.forms);
    auto rounded = to_float32(trained.model);
    auto as_float = to_float32(loaded.model);
    CHECK(same_parameters(rounded, as_float));
    CHECK(predict(as_float, data.bank) == predict(rounded, data.bank));
  }

  TEST_CASE("corrupt checkpoints are format errors") {
    const auto data = synthetic(2, 6, 3);
    auto model = train<double>(small_config(0), data.bank, data.store).model;
    std::stringstream io;
    save_checkpoint(io, model, small_config(0));
    const std::string good = io.str();
    auto load_text = [](const std::string& s) {
      std::istringstream in(s);
      return load_checkpoint<double>(in);
    };
    CHECK_NOTHROW(load_text(good));
    CHECK_THROWS_AS(load_text(good.substr(0, good.size() - 3)), FormatError);
    CHECK_THROWS_AS(load_text("NOTAZONE" + good.substr(8)), FormatError);
    std::string bad_version = good;
    bad_version[8] = 7;
    CHECK_THROWS_AS(load_text(bad_version), FormatError);
    CHECK_THROWS_AS(load_text(""), FormatError);
  }
}
