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

#include "support.hpp"
#include "treezone/errors.hpp"
#include "treezone/numcore/gradcheck.hpp"
#include "treezone/training/loss.hpp"
#include "treezone/treelstm.hpp"

using namespace treezone;
using treezone::testing::max_abs_diff;
using treezone::testing::random_tensor;

namespace {

using Vec = std::vector<double>;

LstmWeights<double> zero_weights(std::size_t hidden, std::size_t input) {
  Rng rng(0);
  auto w = LstmWeights<double>::init(hidden, input, rng);
  for (auto* p : w.parameters()) p->value.fill(0.0);
  return w;
}

LstmWeights<double> random_weights(std::size_t hidden, std::size_t input, Rng& rng) {
  auto w = LstmWeights<double>::init(hidden, input, rng);
  for (auto* p : w.parameters()) {
    for (double& x : p->value.data()) x = rng.uniform(-0.8, 0.8);
  }
  return w;
}

Vec affine(const GateParams<double>& g, const Vec& x, const Vec* h) {
  const auto& W = g.input_weights.value;
  const auto& U = g.hidden_weights.value;
  Vec out(W.rows());
  for (std::size_t r = 0; r < W.rows(); ++r) {
    double s = g.bias.value[r];
    for (std::size_t c = 0; c < W.cols(); ++c) s += W.at(r, c) * x[c];
    if (h) {
      for (std::size_t c = 0; c < U.cols(); ++c) s += U.at(r, c) * (*h)[c];
    }
    out[r] = s;
  }
  return out;
}

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct PlainState {
  Vec h, c;
};

// Child-Sum node written directly from the gate definitions.
PlainState oracle_node(const LstmWeights<double>& w, const Vec& x,
                       const std::vector<PlainState>& kids, bool per_child_forget) {
  const std::size_t n = w.hidden_size();
  Vec hsum(n, 0.0);
  for (const auto& k : kids)
    for (std::size_t i = 0; i < n; ++i) hsum[i] += k.h[i];
  const Vec ai = affine(w.input_gate, x, &hsum), ao = affine(w.output_gate, x, &hsum),
            au = affine(w.update, x, &hsum);
  PlainState s{Vec(n), Vec(n)};
  for (std::size_t i = 0; i < n; ++i) s.c[i] = sig(ai[i]) * std::tanh(au[i]);
  for (const auto& k : kids) {
    const Vec af = affine(w.forget_gate, x, per_child_forget ? &k.h : &hsum);
    for (std::size_t i = 0; i < n; ++i) s.c[i] += sig(af[i]) * k.c[i];
  }
  for (std::size_t i = 0; i < n; ++i) s.h[i] = sig(ao[i]) * std::tanh(s.c[i]);
  return s;
}

Tensor<double> as_tensor(const Vec& v) { return Tensor<double>({v.size()}, v); }

TreeLstmModel<double> small_model(Rng& rng, std::size_t hidden, std::size_t vocab,
                                  std::size_t dim, CellOptions options = {}) {
  const EmbeddingStore store = make_synthetic_store(rng.next(), vocab, dim);
  std::vector<std::string> forms;
  for (std::size_t w = 0; w < vocab; ++w) forms.push_back("w" + std::to_string(w));
  std::sort(forms.begin(), forms.end());
  return make_model<double>(store, forms, hidden, 0.0, options, rng);
}

Tensor<double> run_tree(TreeLstmModel<double>& model, const SentenceTree& tree,
                        const ZoneoutConfig& z, std::uint64_t seed) {
  Rng rng(seed);
  ZoneoutSampler<double> sampler(z, model.hidden_size(), rng);
  Tape<double> tape;
  return forward_tree(tape, model, tree, sampler).logits_matrix();
}

}  // namespace

TEST_SUITE("cell") {
  TEST_CASE("zero weights on a leaf give half-open gates and zero state") {
    auto w = zero_weights(3, 2);
    Rng rng(0);
    ZoneoutSampler<double> sampler({}, 3, rng);
    Tape<double> tape;
    const auto s = forward_node(w, tape.constant(Tensor<double>::vector({0.7, -0.2})), {},
                                sampler);
    for (double v : s.c.value().data()) CHECK(v == 0.0);
    for (double v : s.h.value().data()) CHECK(v == 0.0);
  }

  TEST_CASE("zero weights with one child of unit cell state") {
    auto w = zero_weights(3, 2);
    Rng rng(0);
    ZoneoutSampler<double> sampler({}, 3, rng);
    Tape<double> tape;
    const NodeState<double> child{tape.constant(Tensor<double>({3}, 0.0)),
                                  tape.constant(Tensor<double>({3}, 1.0))};
    const auto s = forward_node(w, tape.constant(Tensor<double>({2})),
                                std::span<const NodeState<double>>(&child, 1), sampler);
    for (double v : s.c.value().data()) CHECK(v == 0.5);
    for (double v : s.h.value().data()) {
      CHECK(v == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
      CHECK(v == doctest::Approx(0.231059).epsilon(1e-6));
    }
  }

  TEST_CASE("node update matches a direct evaluation, both forget-gate inputs") {
    Rng rng(31);
    for (bool per_child : {false, true}) {
      for (int trial = 0; trial < 20; ++trial) {
        const std::size_t hidden = 1 + rng.below(6), input = 1 + rng.below(5);
        auto w = random_weights(hidden, input, rng);
        const Vec x = [&] {
          Vec v(input);
          for (double& e : v) e = rng.uniform(-1, 1);
          return v;
        }();
        std::vector<PlainState> kids(rng.below(4));
        for (auto& k : kids) {
          k.h.resize(hidden);
          k.c.resize(hidden);
          for (double& e : k.h) e = rng.uniform(-1, 1);
          for (double& e : k.c) e = rng.uniform(-2, 2);
        }
        Tape<double> tape;
        std::vector<NodeState<double>> vars;
        for (const auto& k : kids) {
          vars.push_back({tape.constant(as_tensor(k.h)), tape.constant(as_tensor(k.c))});
        }
        Rng zr(0);
        ZoneoutSampler<double> sampler({}, hidden, zr);
        const auto got = forward_node<double>(w, tape.constant(as_tensor(x)), vars, sampler,
                                              {.per_child_forget_input = per_child});
        const auto want = oracle_node(w, x, kids, per_child);
        CHECK(max_abs_diff(got.h.value(), as_tensor(want.h)) < 1e-14);
        CHECK(max_abs_diff(got.c.value(), as_tensor(want.c)) < 1e-14);
      }
    }
  }

  TEST_CASE("forget-gate input choice only matters with several children") {
    Rng rng(32);
    auto w = random_weights(4, 3, rng);
    const Vec x{0.1, 0.2, -0.3};
    const PlainState a{{0.1, -0.2, 0.3, 0.4}, {1, 2, 3, 4}}, b{{-0.5, 0.5, 0.0, 0.2}, {1, 1, 1, 1}};
    const auto one_shared = oracle_node(w, x, {a}, false), one_each = oracle_node(w, x, {a}, true);
    CHECK(one_shared.h == one_each.h);
    const auto two_shared = oracle_node(w, x, {a, b}, false),
               two_each = oracle_node(w, x, {a, b}, true);
    CHECK(two_shared.h != two_each.h);
  }

  TEST_CASE("child order does not change the node update") {
    Rng rng(33);
    for (bool per_child : {false, true}) {
      auto w = random_weights(5, 3, rng);
      Tape<double> tape;
      std::vector<NodeState<double>> kids;
      for (int k = 0; k < 4; ++k) {
        kids.push_back({tape.constant(random_tensor<double>(rng, {5})),
                        tape.constant(random_tensor<double>(rng, {5}))});
      }
      const auto x = tape.constant(random_tensor<double>(rng, {3}));
      Rng zr(0);
      ZoneoutSampler<double> sampler({}, 5, zr);
      const CellOptions opts{.per_child_forget_input = per_child};
      const auto base = forward_node<double>(w, x, kids, sampler, opts);
      std::vector<NodeState<double>> rev(kids.rbegin(), kids.rend());
      const auto flipped = forward_node<double>(w, x, rev, sampler, opts);
      CHECK(max_abs_diff(base.h.value(), flipped.h.value()) < 1e-15);
      CHECK(max_abs_diff(base.c.value(), flipped.c.value()) < 1e-15);
    }
  }

  TEST_CASE("mismatched shapes are dimension errors") {
    auto w = zero_weights(3, 2);
    Rng rng(0);
    ZoneoutSampler<double> sampler({}, 3, rng);
    Tape<double> tape;
    CHECK_THROWS_AS(forward_node(w, tape.constant(Tensor<double>({3})), {}, sampler),
                    DimensionError);
    const NodeState<double> bad{tape.constant(Tensor<double>({4})),
                                tape.constant(Tensor<double>({4}))};
    CHECK_THROWS_AS(forward_node(w, tape.constant(Tensor<double>({2})),
                                 std::span<const NodeState<double>>(&bad, 1), sampler),
                    DimensionError);
  }

  TEST_CASE("initialisation ranges") {
    Rng rng(34);
    const std::size_t hidden = 16;
    auto w = LstmWeights<double>::init(hidden, 7, rng);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto* p : w.parameters()) {
      CAPTURE(p->name);
      if (p->value.rank() == 2) {
        for (double v : p->value.data()) CHECK(std::abs(v) <= bound);
      } else {
        const double expect = p == &w.forget_gate.bias ? 1.0 : 0.0;
        for (double v : p->value.data()) CHECK(v == expect);
      }
    }
  }
}

TEST_SUITE("sequential oracle") {
  TEST_CASE("zero weights give zero hidden states") {
    auto w = zero_weights(4, 3);
    Rng rng(41);
    std::vector<Tensor<double>> xs;
    for (int t = 0; t < 6; ++t) xs.push_back(random_tensor<double>(rng, {3}));
    const auto states = seq_forward<double>(w, xs);
    CHECK(states.size() == xs.size());
    for (const auto& s : states)
      for (double v : s.h.data()) CHECK(v == 0.0);
  }

  TEST_CASE("a single step equals a leaf update") {
    Rng rng(42);
    auto w = random_weights(5, 4, rng);
    const auto x = random_tensor<double>(rng, {4});
    const auto seq = seq_forward<double>(w, std::span<const Tensor<double>>(&x, 1));
    Tape<double> tape;
    Rng zr(0);
    ZoneoutSampler<double> sampler({}, 5, zr);
    const auto leaf = forward_node(w, tape.constant(x), {}, sampler);
    CHECK(max_abs_diff(seq[0].h, leaf.h.value()) < 1e-15);
    CHECK(max_abs_diff(seq[0].c, leaf.c.value()) < 1e-15);
  }

  TEST_CASE("tree states on a chain equal sequential states") {
    Rng rng(43);
    for (bool per_child : {false, true}) {
      for (int trial = 0; trial < 10; ++trial) {
        const std::size_t len = 1 + rng.below(10);
        auto model = small_model(rng, 6, 8, 5, {.per_child_forget_input = per_child});
        for (auto* p : model.cell.parameters())
          for (double& v : p->value.data()) v = rng.uniform(-0.8, 0.8);
        const auto tree = testing::chain_tree(len, 8, rng);
        Rng zr(0);
        ZoneoutSampler<double> sampler({}, 6, zr);
        Tape<double> tape;
        const auto out = forward_tree(tape, model, tree, sampler);
        std::vector<Tensor<double>> xs;
        for (std::size_t i = 1; i <= len; ++i) {
          const auto row = model.embedding.matrix.value.row(*model.embedding.row_of(tree.token(i).form));
          xs.push_back(Tensor<double>({row.size()}, std::vector<double>(row.begin(), row.end())));
        }
        const auto seq = seq_forward<double>(model.cell, xs);
        for (std::size_t i = 0; i < len; ++i) {
          CHECK(max_abs_diff(seq[i].h, out.states[i].h.value()) < 1e-12);
          CHECK(max_abs_diff(seq[i].c, out.states[i].c.value()) < 1e-12);
        }
      }
    }
  }
}

TEST_SUITE("zoneout") {
  TEST_CASE("zero rates reproduce the plain forward pass bit for bit") {
    Rng rng(51);
    auto model = small_model(rng, 6, 10, 4);
    for (int trial = 0; trial < 10; ++trial) {
      const auto tree = testing::random_tree(rng, 2 + rng.below(12), 10);
      const auto plain = run_tree(model, tree, {}, 1);
      for (auto strategy : {ZoneoutStrategy::SumChild, ZoneoutStrategy::ChooseChild}) {
        for (auto scope : {MaskScope::Common, MaskScope::Distinct}) {
          ZoneoutConfig z{strategy, scope, 0.0, 0.0};
          CHECK(run_tree(model, tree, z, 2) == plain);
          z.mode = Mode::Eval;
          CHECK(run_tree(model, tree, z, 3) == plain);
        }
      }
    }
  }

  TEST_CASE("full-rate sum-child replaces h with the child sum") {
    Tape<double> tape;
    const std::vector<NodeState<double>> kids = {
        {tape.constant(Tensor<double>::vector({1, 0})), tape.constant(Tensor<double>::vector({2, 0}))},
        {tape.constant(Tensor<double>::vector({0, 1})), tape.constant(Tensor<double>::vector({0, 3}))},
    };
    const NodeState<double> fresh{tape.constant(Tensor<double>::vector({0.3, 0.4})),
                                  tape.constant(Tensor<double>::vector({0.5, 0.6}))};
    Rng rng(52);
    ZoneoutSampler<double> sampler({ZoneoutStrategy::SumChild, MaskScope::Distinct, 0.0, 1.0}, 2,
                                   rng);
    const auto out = apply_zoneout<double>(fresh, kids, sampler);
    CHECK(out.h.value() == Tensor<double>::vector({1, 1}));
    CHECK(out.c.value() == fresh.c.value());
  }

  TEST_CASE("full-rate choose-child with one child copies it") {
    Tape<double> tape;
    const NodeState<double> kid{tape.constant(Tensor<double>::vector({0.25, -0.5})),
                                tape.constant(Tensor<double>::vector({2, 3}))};
    const NodeState<double> fresh{tape.constant(Tensor<double>::vector({0.3, 0.4})),
                                  tape.constant(Tensor<double>::vector({0.5, 0.6}))};
    for (auto scope : {MaskScope::Common, MaskScope::Distinct}) {
      Rng rng(53);
      ZoneoutSampler<double> sampler({ZoneoutStrategy::ChooseChild, scope, 1.0, 1.0}, 2, rng);
      const auto out = apply_zoneout<double>(fresh, std::span<const NodeState<double>>(&kid, 1),
                                             sampler);
      CHECK(out.h.value() == kid.h.value());
      CHECK(out.c.value() == kid.c.value());
    }
  }

  TEST_CASE("choose-child takes one child's h and c coordinate-wise") {
    Rng rng(54);
    Tape<double> tape;
    std::vector<NodeState<double>> kids;
    for (int k = 0; k < 3; ++k) {
      kids.push_back({tape.constant(Tensor<double>({4}, 10.0 * (k + 1))),
                      tape.constant(Tensor<double>({4}, 100.0 * (k + 1)))});
    }
    const NodeState<double> fresh{tape.constant(Tensor<double>({4}, 0.5)),
                                  tape.constant(Tensor<double>({4}, 0.25))};
    std::array<int, 3> picks{};
    for (int trial = 0; trial < 300; ++trial) {
      ZoneoutSampler<double> sampler({ZoneoutStrategy::ChooseChild, MaskScope::Distinct, 1.0, 1.0},
                                     4, rng);
      const auto out = apply_zoneout<double>(fresh, kids, sampler);
      const double h = out.h.value()[0];
      const int k = static_cast<int>(h / 10.0) - 1;
      REQUIRE(k >= 0);
      REQUIRE(k < 3);
      ++picks[static_cast<std::size_t>(k)];
      CHECK(out.c.value()[0] == 100.0 * (k + 1));
    }
    for (int p : picks) CHECK(p > 60);  // roughly uniform, 100 expected each
  }

  TEST_CASE("leaves are never zoned out") {
    Tape<double> tape;
    const NodeState<double> fresh{tape.constant(Tensor<double>::vector({0.3, 0.4})),
                                  tape.constant(Tensor<double>::vector({0.5, 0.6}))};
    Rng rng(55);
    ZoneoutSampler<double> sampler({ZoneoutStrategy::SumChild, MaskScope::Distinct, 1.0, 1.0}, 2,
                                   rng);
    const auto out = apply_zoneout<double>(fresh, {}, sampler);
    CHECK(out.h.id() == fresh.h.id());
    CHECK(out.c.id() == fresh.c.id());
  }

  TEST_CASE("empirical mask frequency is within three sigma of the rate") {
    for (double rate : {0.05, 0.3, 0.5, 0.9}) {
      for (auto scope : {MaskScope::Common, MaskScope::Distinct}) {
        Rng rng(56);
        const std::size_t hidden = 100, draws = 100;  // 10,000 coordinates
        ZoneoutSampler<double> sampler({ZoneoutStrategy::SumChild, scope, rate, rate}, hidden,
                                       rng);
        double zoned_c = 0, zoned_h = 0;
        for (std::size_t d = 0; d < draws; ++d) {
          sampler.begin_tree();
          const auto mc = sampler.cell_mask(), mh = sampler.hidden_mask();
          for (double m : mc.data()) zoned_c += m == 0.0;
          for (double m : mh.data()) zoned_h += m == 0.0;
        }
        const double n = static_cast<double>(hidden * draws);
        const double sigma = std::sqrt(rate * (1 - rate) / n);
        CAPTURE(rate);
        CHECK(std::abs(zoned_c / n - rate) < 3 * sigma);
        CHECK(std::abs(zoned_h / n - rate) < 3 * sigma);
      }
    }
  }

  TEST_CASE("common scope shares one mask within a tree, distinct redraws") {
    Rng rng(57);
    ZoneoutSampler<double> common({ZoneoutStrategy::SumChild, MaskScope::Common, 0.5, 0.5}, 64,
                                  rng);
    common.begin_tree();
    const auto first = common.cell_mask();
    CHECK(common.cell_mask() == first);
    common.begin_tree();
    CHECK(common.cell_mask() != first);
    ZoneoutSampler<double> distinct({ZoneoutStrategy::SumChild, MaskScope::Distinct, 0.5, 0.5}, 64,
                                    rng);
    distinct.begin_tree();
    CHECK(distinct.cell_mask() != distinct.cell_mask());
  }

  TEST_CASE("eval mode is deterministic and ignores the generator") {
    Rng rng(58);
    auto model = small_model(rng, 5, 10, 4);
    const auto tree = testing::random_tree(rng, 9, 10);
    for (bool expectation : {false, true}) {
      for (auto strategy : {ZoneoutStrategy::SumChild, ZoneoutStrategy::ChooseChild}) {
        ZoneoutConfig z{strategy, MaskScope::Distinct, 0.4, 0.6, Mode::Eval, expectation};
        const auto a = run_tree(model, tree, z, 1), b = run_tree(model, tree, z, 999);
        CHECK(a == b);
        if (!expectation) CHECK(a == run_tree(model, tree, {}, 5));
      }
    }
  }

  TEST_CASE("eval expectation mixes in the substitute by its expected weight") {
    Tape<double> tape;
    const std::vector<NodeState<double>> kids = {
        {tape.constant(Tensor<double>::vector({1, 0})), tape.constant(Tensor<double>::vector({0, 0}))},
        {tape.constant(Tensor<double>::vector({0, 3})), tape.constant(Tensor<double>::vector({0, 0}))},
    };
    const NodeState<double> fresh{tape.constant(Tensor<double>::vector({2, 2})),
                                  tape.constant(Tensor<double>::vector({0, 0}))};
    Rng rng(59);
    ZoneoutConfig z{ZoneoutStrategy::SumChild, MaskScope::Distinct, 0.0, 0.25, Mode::Eval, true};
    ZoneoutSampler<double> sum_sampler(z, 2, rng);
    const auto s = apply_zoneout<double>(fresh, kids, sum_sampler);
    CHECK(s.h.value()[0] == doctest::Approx(0.75 * 2 + 0.25 * 1));
    CHECK(s.h.value()[1] == doctest::Approx(0.75 * 2 + 0.25 * 3));
    z.strategy = ZoneoutStrategy::ChooseChild;
    ZoneoutSampler<double> choose_sampler(z, 2, rng);
    const auto c = apply_zoneout<double>(fresh, kids, choose_sampler);
    CHECK(c.h.value()[0] == doctest::Approx(0.75 * 2 + 0.25 * 0.5));
    CHECK(c.h.value()[1] == doctest::Approx(0.75 * 2 + 0.25 * 1.5));
  }

  TEST_CASE("rates outside [0, 1] are rejected") {
    CHECK_THROWS_AS((ZoneoutConfig{ZoneoutStrategy::SumChild, MaskScope::Common, 1.5, 0.0}.validate()),
                    UsageError);
    CHECK_THROWS_AS((ZoneoutConfig{ZoneoutStrategy::SumChild, MaskScope::Common, 0.0, -0.1}.validate()),
                    UsageError);
  }
}

TEST_SUITE("tree") {
  TEST_CASE("single-token sentence with zero weights emits the output bias") {
    Rng rng(61);
    auto model = small_model(rng, 4, 3, 2);
    for (auto* p : model.cell.parameters()) p->value.fill(0.0);
    model.output.weights.value.fill(0.0);
    model.output.bias.value = Tensor<double>::vector({0.1, -0.2, 0.3});
    const SentenceTree tree({{1, "w1", 0, "root", 0, std::nullopt}});
    CHECK(run_tree(model, tree, {}, 0) == Tensor<double>::matrix(1, 3, {0.1, -0.2, 0.3}));
  }

  TEST_CASE("same tree and seed in train mode give identical logits") {
    Rng rng(62);
    auto model = small_model(rng, 5, 10, 4);
    const auto tree = testing::random_tree(rng, 12, 10);
    const ZoneoutConfig z{ZoneoutStrategy::ChooseChild, MaskScope::Distinct, 0.5, 0.5};
    CHECK(run_tree(model, tree, z, 77) == run_tree(model, tree, z, 77));
    CHECK(run_tree(model, tree, z, 77) != run_tree(model, tree, z, 78));
  }

  TEST_CASE("unknown tokens are data errors naming the token") {
    Rng rng(63);
    auto model = small_model(rng, 4, 3, 2);
    const SentenceTree tree({{1, "nieznany", 0, "root", 0, std::nullopt}});
    try {
      run_tree(model, tree, {}, 0);
      FAIL("expected a data error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("nieznany") != std::string::npos);
    }
  }

  TEST_CASE("lemma mode embeds by the lemma column") {
    Rng rng(64);
    auto model = small_model(rng, 4, 3, 2, {.use_lemmas = true});
    const SentenceTree tree({{1, "w9", 0, "root", 0, std::string("w1")}});
    const SentenceTree same({{1, "w1", 0, "root", 0, std::nullopt}});
    CHECK(run_tree(model, tree, {}, 0) == run_tree(model, same, {}, 0));
  }

  TEST_CASE("gradients over a 3-node tree match central differences") {
    Rng rng(65);
    for (bool per_child : {false, true}) {
      auto model = small_model(rng, 4, 5, 3, {.per_child_forget_input = per_child});
      for (auto* p : model.parameters())
        if (p->value.rank() == 1)
          for (double& v : p->value.data()) v += rng.uniform(-0.5, 0.5);
      const SentenceTree tree({{1, "w0", 2, "a", -1, std::nullopt},
                               {2, "w3", 0, "b", 1, std::nullopt},
                               {3, "w4", 2, "c", 0, std::nullopt}});
      const std::vector<std::size_t> gold{0, 2, 1};
      auto params = model.parameters();
      auto weights = model.weight_matrices();
      auto loss = [&](Tape<double>& tape) {
        Rng zr(1);
        ZoneoutSampler<double> sampler({}, 4, zr);
        const auto out = forward_tree(tape, model, tree, sampler);
        return tree_loss<double>(out.logits, gold, weights, 1e-3);
      };
      for (const auto& e : check_parameter_gradients<double>(params, loss, 1e-5)) {
        CAPTURE(e.name);
        CHECK(e.rel_error < 1e-4);
      }
    }
  }

  TEST_CASE("gradients with fixed zoneout masks match central differences") {
    Rng rng(66);
    auto model = small_model(rng, 5, 6, 3);
    const auto tree = testing::random_tree(rng, 7, 6);
    std::vector<std::size_t> gold;
    for (const auto& t : tree.tokens()) gold.push_back(t.label());
    auto params = model.parameters();
    auto weights = model.weight_matrices();
    for (auto strategy : {ZoneoutStrategy::SumChild, ZoneoutStrategy::ChooseChild}) {
      auto loss = [&](Tape<double>& tape) {
        Rng zr(9);
        ZoneoutSampler<double> sampler({strategy, MaskScope::Distinct, 0.4, 0.4}, 5, zr);
        const auto out = forward_tree(tape, model, tree, sampler);
        return tree_loss<double>(out.logits, gold, weights, 0.0);
      };
      for (const auto& e : check_parameter_gradients<double>(params, loss, 1e-5)) {
        CAPTURE(e.name);
        CHECK(e.rel_error < 1e-4);
      }
    }
  }
}

TEST_SUITE("prediction") {
  TEST_CASE("argmax examples and tie-break") {
    CHECK(predict_labels(Tensor<double>::matrix(1, 3, {0.1, 0.9, 0.0})) == std::vector<std::size_t>{1});
    CHECK(predict_labels(Tensor<double>::matrix(1, 3, {0.5, 0.5, 0.1})) == std::vector<std::size_t>{0});
    CHECK(predict_labels(Tensor<double>::matrix(1, 3, {0.2, 0.7, 0.7})) == std::vector<std::size_t>{1});
  }

  TEST_CASE("argmax is invariant to shifting a row") {
    Rng rng(71);
    for (int trial = 0; trial < 100; ++trial) {
      auto m = random_tensor<double>(rng, {4, 3}, -5, 5);
      auto shifted = m;
      for (std::size_t r = 0; r < 4; ++r) {
        const double c = std::round(rng.uniform(-8, 8));
        for (double& v : shifted.row(r)) v += c;
      }
      CHECK(predict_labels(m) == predict_labels(shifted));
    }
  }
}

TEST_SUITE("vocabulary") {
  TEST_CASE("extending the vocabulary keeps existing rows") {
    Rng rng(81);
    auto model = small_model(rng, 3, 4, 2);
    const auto before = model.embedding.matrix.value;
    EmbeddingStore store(2, 5);
    store.insert("nowy", {7, 8});
    model.extend_vocabulary(store, {"w1", "nowy"});
    CHECK(model.embedding.forms.size() == 5);
    const std::size_t row = *model.embedding.row_of("nowy");
    CHECK(model.embedding.matrix.value.at(row, 0) == 7);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(model.embedding.matrix.value[i] == before[i]);
    EmbeddingStore wrong(3, 5);
    CHECK_THROWS_AS(model.extend_vocabulary(wrong, {"inny"}), DataError);
  }
}
