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

#include "treezone/training/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "treezone/errors.hpp"

namespace treezone {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "adagrad"; }

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("config key '" + std::string(key) + "': '" + std::string(v) +
                     "' is not a number");
  }
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("config key '" + std::string(key) + "': '" + std::string(v) +
                     "' is not a non-negative integer");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key '" + std::string(key) + "': '" + std::string(v) +
                   "' is not a boolean");
}

}  // namespace

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> k = {
      "batch_size",      "hidden",        "lr",
      "emb_lr",          "weight_decay",  "l2",
      "optimizer",       "epsilon",       "adam.beta1",
      "adam.beta2",      "epochs",        "seed",
      "ensemble_epochs", "zoneout.strategy", "zoneout.mask",
      "zoneout.rate_c",  "zoneout.rate_h", "zoneout.eval_expectation",
      "per_child_forget_input", "use_lemmas", "oov_policy",
      "emb_dim",
  };
  return k;
}

void TrainConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "batch_size") {
    batch_size = to_uint(key, v);
  } else if (key == "hidden") {
    hidden = to_uint(key, v);
  } else if (key == "lr") {
    lr = to_double(key, v);
  } else if (key == "emb_lr") {
    emb_lr = to_double(key, v);
  } else if (key == "weight_decay") {
    weight_decay = to_double(key, v);
  } else if (key == "l2") {
    l2 = to_double(key, v);
  } else if (key == "optimizer") {
    if (v == "adagrad") {
      optimizer = OptimizerKind::Adagrad;
    } else if (v == "adam") {
      optimizer = OptimizerKind::Adam;
    } else {
      throw UsageError("config key 'optimizer': expected adagrad or adam, got '" +
                       std::string(v) + "'");
    }
  } else if (key == "epsilon") {
    epsilon = to_double(key, v);
  } else if (key == "adam.beta1") {
    beta1 = to_double(key, v);
  } else if (key == "adam.beta2") {
    beta2 = to_double(key, v);
  } else if (key == "epochs") {
    epochs = to_uint(key, v);
  } else if (key == "seed") {
    seed = to_uint(key, v);
  } else if (key == "ensemble_epochs") {
    ensemble_epochs = to_uint(key, v);
  } else if (key == "zoneout.strategy") {
    zoneout.strategy = parse_strategy(v);
  } else if (key == "zoneout.mask") {
    zoneout.scope = parse_mask_scope(v);
  } else if (key == "zoneout.rate_c") {
    zoneout.rate_c = to_double(key, v);
  } else if (key == "zoneout.rate_h") {
    zoneout.rate_h = to_double(key, v);
  } else if (key == "zoneout.eval_expectation") {
    zoneout.eval_expectation = to_bool(key, v);
  } else if (key == "per_child_forget_input") {
    cell.per_child_forget_input = to_bool(key, v);
  } else if (key == "use_lemmas") {
    cell.use_lemmas = to_bool(key, v);
  } else if (key == "oov_policy") {
    if (v != "auto" && !v.empty()) parse_oov_policy(v);
    oov_policy = v == "auto" ? "" : std::string(v);
  } else if (key == "emb_dim") {
    emb_dim = to_uint(key, v);
  } else {
    throw UsageError("unknown config key '" + std::string(key) + "'");
  }
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  if (hidden == 0) throw UsageError("hidden must be positive");
  if (emb_dim == 0) throw UsageError("emb_dim must be positive");
  if (!(lr > 0.0)) throw UsageError("lr must be positive");
  if (emb_lr < 0.0) throw UsageError("emb_lr must be non-negative");
  if (weight_decay < 0.0) throw UsageError("weight_decay must be non-negative");
  if (l2 < 0.0) throw UsageError("l2 must be non-negative");
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw UsageError("adam betas must lie in [0, 1)");
  }
  if (ensemble_epochs == 0) throw UsageError("ensemble_epochs must be at least 1");
  zoneout.validate();
}

std::vector<std::pair<std::string, std::string>> TrainConfig::items() const {
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  return {
      {"batch_size", std::to_string(batch_size)},
      {"hidden", std::to_string(hidden)},
      {"lr", format_double(lr)},
      {"emb_lr", format_double(emb_lr)},
      {"weight_decay", format_double(weight_decay)},
      {"l2", format_double(l2)},
      {"optimizer", to_string(optimizer)},
      {"epsilon", format_double(epsilon)},
      {"adam.beta1", format_double(beta1)},
      {"adam.beta2", format_double(beta2)},
      {"epochs", std::to_string(epochs)},
      {"seed", std::to_string(seed)},
      {"ensemble_epochs", std::to_string(ensemble_epochs)},
      {"zoneout.strategy", to_string(zoneout.strategy)},
      {"zoneout.mask", to_string(zoneout.scope)},
      {"zoneout.rate_c", format_double(zoneout.rate_c)},
      {"zoneout.rate_h", format_double(zoneout.rate_h)},
      {"zoneout.eval_expectation", b(zoneout.eval_expectation)},
      {"per_child_forget_input", b(cell.per_child_forget_input)},
      {"use_lemmas", b(cell.use_lemmas)},
      {"oov_policy", oov_policy.empty() ? "auto" : oov_policy},
      {"emb_dim", std::to_string(emb_dim)},
  };
}

TrainConfig parse_config(std::istream& in, TrainConfig base, const std::string& source) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

TrainConfig load_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base), path);
}

}  // namespace treezone
