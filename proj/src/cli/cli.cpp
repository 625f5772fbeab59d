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

#include "treezone/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>

#include "treezone/errors.hpp"
#include "treezone/training/checkpoint.hpp"
#include "treezone/training/config.hpp"
#include "treezone/training/evaluate.hpp"
#include "treezone/training/grid.hpp"
#include "treezone/training/loss.hpp"
#include "treezone/training/trainer.hpp"
#include "treezone/treebank.hpp"

namespace treezone::cli {

namespace {

struct Args {
  std::string data;
  std::string eval_data;
  std::string emb;
  std::string subword_emb;
  std::string model;
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::size_t workers = 1;
  int precision = 64;
  std::vector<std::string> axes;
  std::size_t sentences = 32;
  std::size_t vocab = 50;
  std::size_t max_len = 12;
  std::string emb_out;
  std::size_t emb_dim = 50;
};

void add_precision(CLI::App* cmd, Args& a) {
  cmd->add_option("--precision", a.precision, "Floating-point width: 32 or 64")
      ->check(CLI::IsMember({32, 64}))
      ->capture_default_str();
}

void add_seed(CLI::App* cmd, Args& a, const std::string& what) {
  cmd->add_option("--seed", a.seed, what);
}

void add_store_flags(CLI::App* cmd, Args& a) {
  cmd->add_option("--emb", a.emb, "Word vectors in text format (optional header line)");
  cmd->add_option("--subword-emb", a.subword_emb, "Character n-gram vectors for OOV composition");
}

void add_config_flags(CLI::App* cmd, Args& a) {
  cmd->add_option("--config", a.config, "Config file of 'key = value' lines");
  cmd->add_option("--set", a.sets, "Override one config key: key=value (repeatable)")
      ->take_all()
      ->allow_extra_args(false);
}

// Registers every subcommand; returns them in a fixed order.
std::vector<CLI::App*> build(CLI::App& app, Args& a) {
  app.require_subcommand(1);
  app.fallthrough(false);

  CLI::App* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--data", a.data, "Training treebank")->required();
  train->add_option("--eval-data", a.eval_data, "Held-out treebank scored after training");
  add_store_flags(train, a);
  train->add_option("--out", a.out, "Checkpoint path to write");
  add_seed(train, a, "Seed for every random choice (overrides the config's seed)");
  add_config_flags(train, a);
  add_precision(train, a);

  CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint on a treebank");
  eval->add_option("--model", a.model, "Checkpoint to load")->required();
  eval->add_option("--data", a.data, "Treebank with gold labels")->required();
  add_store_flags(eval, a);
  add_seed(eval, a, "Seed for random OOV vectors (default: the checkpoint's seed)");
  add_precision(eval, a);

  CLI::App* predict = app.add_subcommand("predict", "Label every node of a treebank");
  predict->add_option("--model", a.model, "Checkpoint to load")->required();
  predict->add_option("--data", a.data, "Treebank to label")->required();
  add_store_flags(predict, a);
  predict->add_option("--out", a.out, "Output treebank path (default: stdout)");
  add_seed(predict, a, "Seed for random OOV vectors (default: the checkpoint's seed)");
  add_precision(predict, a);

  CLI::App* grid = app.add_subcommand("gridsearch", "Train one model per grid cell and rank them");
  grid->add_option("--data", a.data, "Training treebank")->required();
  grid->add_option("--eval-data", a.eval_data, "Treebank the cells are scored on (default: --data)");
  add_store_flags(grid, a);
  grid->add_option("--axis", a.axes, "Grid axis key=v1,v2,... (repeatable)")->required();
  grid->add_option("--workers", a.workers, "Cells trained in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  grid->add_option("--out", a.out, "Also write the result table to this path");
  add_seed(grid, a, "Base seed; each cell derives its own from it");
  add_config_flags(grid, a);
  add_precision(grid, a);

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Compare autodiff gradients with finite differences");
  add_seed(gradcheck, a, "Seed for the random tree and weights");

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic planted-rule treebank");
  synth->add_option("--out", a.out, "Treebank path to write")->required();
  add_seed(synth, a, "Seed for trees and vectors");
  synth->add_option("--sentences", a.sentences, "Number of sentences")->capture_default_str();
  synth->add_option("--vocab", a.vocab, "Number of distinct forms")->capture_default_str();
  synth->add_option("--max-len", a.max_len, "Maximum sentence length")->capture_default_str();
  synth->add_option("--emb-out", a.emb_out, "Also write random vectors for the forms here");
  synth->add_option("--emb-dim", a.emb_dim, "Width of the --emb-out vectors")->capture_default_str();

  return {train, eval, predict, grid, gradcheck, synth};
}

std::uint64_t seed_or(const Args& a, std::uint64_t fallback) { return a.seed.value_or(fallback); }

TrainConfig resolve_config(const Args& a) {
  TrainConfig c;
  if (!a.config.empty()) c = load_config_file(a.config, c);
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set " + kv + ": expected key=value");
    try {
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError("--set " + kv + ": " + e.what());
    }
  }
  if (a.seed) c.seed = *a.seed;
  c.validate();
  return c;
}

EmbeddingStore build_store(const Args& a, std::size_t fallback_dim, const std::string& oov_policy,
                           std::uint64_t seed) {
  EmbeddingStore store =
      a.emb.empty() ? EmbeddingStore(fallback_dim, seed) : load_text_vectors_file(a.emb, seed);
  if (!a.subword_emb.empty()) {
    if (a.emb.empty()) throw UsageError("--subword-emb requires --emb");
    store.set_subword(load_subword_table_file(a.subword_emb, store.dim()));
  }
  if (!oov_policy.empty()) {
    const OovPolicy p = parse_oov_policy(oov_policy);
    if (p == OovPolicy::Subword && !store.subword()) {
      throw UsageError("oov_policy=subword requires --subword-emb");
    }
    store.set_oov_policy(p);
  }
  return store;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_metrics(std::ostream& out, const std::string& split, const MetricsReport& r) {
  out << split << "_node_accuracy\t" << fixed(r.node_accuracy, 4) << '\n';
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const int label = class_to_sentiment(k);
    out << split << "_class_" << (label > 0 ? "+" : "") << label << "\tprecision "
        << fixed(r.precision[k], 4) << "\trecall " << fixed(r.recall[k], 4) << '\n';
  }
}

template <std::floating_point T>
int cmd_train(const Args& a, std::ostream& out) {
  const TrainConfig config = resolve_config(a);
  const Treebank data = parse_treebank_file(a.data);
  std::optional<Treebank> held_out;
  if (!a.eval_data.empty()) held_out = parse_treebank_file(a.eval_data);
  const EmbeddingStore store = build_store(a, config.emb_dim, config.oov_policy, config.seed);

  std::vector<const Treebank*> extra;
  if (held_out) extra.push_back(&*held_out);
  out << "epoch\tmean_loss\n";
  auto result = train<T>(config, data, store, extra, [&](std::size_t epoch, double loss) {
    out << epoch << '\t' << fixed(loss, 6) << '\n' << std::flush;
  });

  write_metrics(out, "train", result.report);
  if (held_out) write_metrics(out, "eval", evaluate(result.model, *held_out, config.zoneout));
  out << "time\t" << result.report.wall_clock() << '\n';
  if (!a.out.empty()) save_checkpoint_file(a.out, result.model, config);
  return kExitOk;
}

// Runs `f`, prefixing data errors with the treebank they came from.
template <typename F>
auto on_data(const Args& a, F&& f) {
  try {
    return f();
  } catch (const DataError& e) {
    throw DataError("--data " + a.data + ": " + e.what());
  }
}

template <std::floating_point T>
LoadedModel<T> load_for_inference(const Args& a, const Treebank& tb) {
  LoadedModel<T> loaded = load_checkpoint_file<T>(a.model);
  if (!a.emb.empty()) {
    const EmbeddingStore store = build_store(a, loaded.model.input_size(),
                                             loaded.config.oov_policy,
                                             seed_or(a, loaded.config.seed));
    const Treebank* banks[] = {&tb};
    try {
      loaded.model.extend_vocabulary(store, collect_vocabulary(banks, loaded.model.options));
    } catch (const DataError& e) {
      throw DataError("--emb " + a.emb + ": " + e.what());
    }
  } else if (!a.subword_emb.empty()) {
    throw UsageError("--subword-emb requires --emb");
  }
  for (std::size_t s = 0; s < tb.size(); ++s) {
    for (const Token& t : tb.sentences()[s].tokens()) {
      const std::string& key = embedding_key(t, loaded.model.options);
      if (!loaded.model.embedding.row_of(key)) {
        throw DataError("--data " + a.data + ": sentence " + std::to_string(s + 1) + ", token " +
                        std::to_string(t.index) + ": '" + key +
                        "' is not in the model vocabulary (pass --emb to embed unseen forms)");
      }
    }
  }
  return loaded;
}

template <std::floating_point T>
int cmd_eval(const Args& a, std::ostream& out) {
  const Treebank tb = parse_treebank_file(a.data);
  const LoadedModel<T> loaded = load_for_inference<T>(a, tb);
  const MetricsReport r = on_data(a, [&] { return evaluate(loaded.model, tb, loaded.config.zoneout); });
  out << "node_accuracy " << fixed(r.node_accuracy, 6) << '\n';
  out << "correct_nodes " << r.correct_nodes << '\n';
  out << "total_nodes " << r.total_nodes << '\n';
  return kExitOk;
}

template <std::floating_point T>
int cmd_predict(const Args& a, std::ostream& out) {
  const Treebank tb = parse_treebank_file(a.data);
  const LoadedModel<T> loaded = load_for_inference<T>(a, tb);
  const Treebank labeled = relabel(
      tb, on_data(a, [&] { return predict(loaded.model, tb, loaded.config.zoneout); }));
  if (a.out.empty()) {
    write_treebank(out, labeled);
    return kExitOk;
  }
  std::ofstream file(a.out);
  if (!file) throw DataError("--out: cannot open '" + a.out + "' for writing");
  write_treebank(file, labeled);
  if (!file) throw DataError("--out: failed writing '" + a.out + "'");
  return kExitOk;
}

template <std::floating_point T>
int cmd_gridsearch(const Args& a, std::ostream& out) {
  const TrainConfig config = resolve_config(a);
  std::vector<GridAxis> axes;
  for (const std::string& spec : a.axes) {
    try {
      axes.push_back(parse_axis(spec));
    } catch (const UsageError& e) {
      throw UsageError("--axis " + spec + ": " + e.what());
    }
  }
  const Treebank data = parse_treebank_file(a.data);
  const Treebank held_out = a.eval_data.empty() ? data : parse_treebank_file(a.eval_data);
  const EmbeddingStore store = build_store(a, config.emb_dim, config.oov_policy, config.seed);
  const auto rows = grid_search<T>(config, axes, data, held_out, store, a.workers);
  write_grid_table(out, rows, axes);
  if (!a.out.empty()) {
    std::ofstream file(a.out);
    if (!file) throw DataError("--out: cannot open '" + a.out + "' for writing");
    write_grid_table(file, rows, axes);
  }
  return kExitOk;
}

int cmd_gradcheck(const Args& a, std::ostream& out) {
  const auto entries = tree_gradient_check(seed_or(a, 0));
  double worst = 0.0;
  out << "parameter\trelative_error\n";
  char buf[32];
  for (const GradCheckEntry& e : entries) {
    std::snprintf(buf, sizeof buf, "%.3e", e.rel_error);
    out << e.name << '\t' << buf << '\n';
    worst = std::max(worst, e.rel_error);
  }
  std::snprintf(buf, sizeof buf, "%.3e", worst);
  out << "max_relative_error " << buf << '\n';
  return worst < 1e-4 ? kExitOk : kExitNumeric;
}

int cmd_synth(const Args& a, std::ostream& out) {
  if (a.sentences == 0) throw UsageError("--sentences must be positive");
  if (a.vocab == 0) throw UsageError("--vocab must be positive");
  if (a.max_len == 0) throw UsageError("--max-len must be positive");
  if (a.emb_dim == 0) throw UsageError("--emb-dim must be positive");
  const std::uint64_t seed = seed_or(a, 0);
  const Treebank tb = make_synthetic_treebank(seed, a.sentences, a.vocab, a.max_len);
  {
    std::ofstream file(a.out);
    if (!file) throw DataError("--out: cannot open '" + a.out + "' for writing");
    write_treebank(file, tb);
  }
  if (!a.emb_out.empty()) {
    const EmbeddingStore store = make_synthetic_store(seed, a.vocab, a.emb_dim);
    std::vector<std::string> forms;
    std::vector<Vector> vectors;
    for (std::size_t w = 0; w < a.vocab; ++w) {
      forms.push_back("w" + std::to_string(w));
      vectors.push_back(*store.find(forms.back()));
    }
    std::ofstream file(a.emb_out);
    if (!file) throw DataError("--emb-out: cannot open '" + a.emb_out + "' for writing");
    write_text_vectors(file, forms, vectors);
  }
  out << "wrote " << tb.size() << " sentences, " << tb.node_count() << " nodes to " << a.out
      << '\n';
  return kExitOk;
}

template <std::floating_point T>
int dispatch(const std::string& name, const Args& a, std::ostream& out) {
  if (name == "train") return cmd_train<T>(a, out);
  if (name == "eval") return cmd_eval<T>(a, out);
  if (name == "predict") return cmd_predict<T>(a, out);
  if (name == "gridsearch") return cmd_gridsearch<T>(a, out);
  if (name == "gradcheck") return cmd_gradcheck(a, out);
  return cmd_synth(a, out);
}

// Random recursive tree over `n` tokens with forms drawn from w0..w<vocab-1>.
SentenceTree random_tree(Rng& rng, std::size_t n, std::size_t vocab) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i + 1;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<Token> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    Token& t = tokens[order[i] - 1];
    t.index = order[i];
    t.head = i == 0 ? 0 : order[rng.below(i)];
    t.form = "w" + std::to_string(rng.below(vocab));
    t.relation = "dep";
    t.sentiment = static_cast<int>(rng.below(3)) - 1;
  }
  return SentenceTree(std::move(tokens));
}

}  // namespace

std::vector<GradCheckEntry> tree_gradient_check(std::uint64_t seed, double step) {
  constexpr std::size_t kNodes = 7, kHidden = 8, kVocab = 5, kDim = 6;
  Rng rng(derive_seed(seed, 0x6772616443ULL));
  const SentenceTree tree = random_tree(rng, kNodes, kVocab);
  if (const auto report = validate_tree(tree); !report.ok()) {
    throw ContractError("gradient check tree is invalid: " + report.message());
  }
  std::vector<std::size_t> gold;
  for (const Token& t : tree.tokens()) gold.push_back(t.label());

  const EmbeddingStore store = make_synthetic_store(seed, kVocab, kDim);
  const Treebank bank({tree});
  const Treebank* banks[] = {&bank};

  struct Variant {
    std::string name;
    ZoneoutConfig zoneout;
    CellOptions options;
  };
  ZoneoutConfig sum_child;
  sum_child.strategy = ZoneoutStrategy::SumChild;
  sum_child.rate_c = sum_child.rate_h = 0.3;
  ZoneoutConfig choose_child;
  choose_child.strategy = ZoneoutStrategy::ChooseChild;
  choose_child.scope = MaskScope::Common;
  choose_child.rate_c = choose_child.rate_h = 0.5;
  const std::vector<Variant> variants = {
      {"plain", {}, {}},
      {"sum_child", sum_child, {}},
      {"choose_child", choose_child, {.per_child_forget_input = true}},
  };

  std::vector<GradCheckEntry> all;
  for (const Variant& v : variants) {
    TreeLstmModel<double> model =
        make_model<double>(store, collect_vocabulary(banks, v.options), kHidden, 0.0, v.options, rng);
    // Move biases off their initial constants so every path carries signal.
    for (Parameter<double>* p : model.parameters()) {
      if (p->value.rank() == 1) {
        for (double& x : p->value.data()) x += rng.uniform(-0.5, 0.5);
      }
    }
    const std::vector<Parameter<double>*> params = model.parameters();
    const std::vector<Parameter<double>*> weights = model.weight_matrices();
    const std::uint64_t mask_seed = rng.next();
    auto loss = [&](Tape<double>& tape) {
      Rng mask_rng(mask_seed);
      ZoneoutSampler<double> sampler(v.zoneout, kHidden, mask_rng);
      const TreeOutput<double> out = forward_tree(tape, model, tree, sampler);
      return tree_loss<double>(out.logits, gold, weights, 1e-2);
    };
    for (GradCheckEntry& e : check_parameter_gradients<double>(params, loss, step)) {
      e.name = v.name + "/" + e.name;
      all.push_back(std::move(e));
    }
  }
  return all;
}

std::vector<std::string> subcommands() {
  CLI::App app;
  Args a;
  std::vector<std::string> names;
  for (CLI::App* cmd : build(app, a)) names.push_back(cmd->get_name());
  return names;
}

std::vector<std::string> flags_of(const std::string& subcommand) {
  CLI::App app;
  Args a;
  build(app, a);
  std::vector<std::string> flags;
  for (const CLI::Option* opt : app.get_subcommand(subcommand)->get_options()) {
    for (const std::string& n : opt->get_lnames()) flags.push_back("--" + n);
  }
  return flags;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Child-Sum Tree-LSTM sentiment tagger with tree zoneout", "treezone");
  Args a;
  const std::vector<CLI::App*> commands = build(app, a);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const auto chosen = std::find_if(commands.begin(), commands.end(),
                                   [](const CLI::App* c) { return c->parsed(); });
  const std::string name = (*chosen)->get_name();
  try {
    return a.precision == 32 ? dispatch<float>(name, a, out) : dispatch<double>(name, a, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace treezone::cli
