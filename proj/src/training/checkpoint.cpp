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

#include "treezone/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <map>
#include <ostream>

#include "treezone/errors.hpp"

namespace treezone {

namespace {

constexpr char kMagic[8] = {'T', 'R', 'E', 'E', 'Z', 'O', 'N', 'E'};

template <typename U>
void put_le(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes, sizeof bytes);
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof bytes)) {
    throw FormatError(std::string("checkpoint truncated while reading ") + what);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

std::string get_bytes(std::istream& in, std::size_t n, const char* what) {
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw FormatError(std::string("checkpoint truncated while reading ") + what);
  }
  return s;
}

// Parameters addressed by name, in a fixed order.
template <typename T>
std::vector<const Parameter<T>*> named_params(const TreeLstmModel<T>& model) {
  auto& m = const_cast<TreeLstmModel<T>&>(model);
  std::vector<const Parameter<T>*> out;
  for (Parameter<T>* p : m.parameters()) out.push_back(p);
  return out;
}

}  // namespace

template <std::floating_point T>
void save_checkpoint(std::ostream& out, const TreeLstmModel<T>& model, const TrainConfig& config) {
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["hidden"] = model.hidden_size();
  manifest["input_dim"] = model.input_size();
  manifest["classes"] = kNumClasses;
  manifest["vocabulary"] = model.embedding.forms;
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.items()) echo[k] = v;
  manifest["config"] = echo;
  const std::string text = manifest.dump();

  out.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  const auto params = named_params(model);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter<T>* p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    const Shape& shape = p->value.shape();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) put_le<std::uint64_t>(out, d);
    for (T v : p->value.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) throw DataError("failed writing checkpoint");
}

template <std::floating_point T>
void save_checkpoint_file(const std::string& path, const TreeLstmModel<T>& model,
                          const TrainConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save_checkpoint(out, model, config);
}

template <std::floating_point T>
LoadedModel<T> load_checkpoint(std::istream& in) {
  const std::string magic = get_bytes(in, sizeof kMagic, "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto manifest_len = get_le<std::uint64_t>(in, "manifest length");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(get_bytes(in, manifest_len, "manifest"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest: ") + e.what());
  }

  LoadedModel<T> loaded;
  std::size_t hidden = 0, input = 0, classes = 0;
  std::vector<std::string> vocab;
  try {
    hidden = manifest.at("hidden").get<std::size_t>();
    input = manifest.at("input_dim").get<std::size_t>();
    classes = manifest.at("classes").get<std::size_t>();
    vocab = manifest.at("vocabulary").get<std::vector<std::string>>();
    for (const auto& [k, v] : manifest.at("config").items()) {
      loaded.config.set(k, v.template get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest: ") + e.what());
  } catch (const UsageError& e) {
    throw FormatError(std::string("checkpoint manifest config: ") + e.what());
  }
  if (classes != kNumClasses) {
    throw FormatError("checkpoint has " + std::to_string(classes) + " classes, expected " +
                      std::to_string(kNumClasses));
  }

  std::map<std::string, Tensor<T>> tensors;
  const auto count = get_le<std::uint32_t>(in, "tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = get_le<std::uint32_t>(in, "tensor name length");
    std::string name = get_bytes(in, name_len, "tensor name");
    const auto rank = get_le<std::uint32_t>(in, "tensor rank");
    if (rank == 0 || rank > 2) throw FormatError("tensor '" + name + "' has rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& d : shape) d = get_le<std::uint64_t>(in, "tensor shape");
    std::vector<T> data(shape_size(shape));
    for (T& v : data) {
      v = static_cast<T>(std::bit_cast<float>(get_le<std::uint32_t>(in, "tensor data")));
    }
    tensors.emplace(std::move(name), Tensor<T>(std::move(shape), std::move(data)));
  }

  TreeLstmModel<T>& m = loaded.model;
  m.options = loaded.config.cell;
  m.embedding.forms = vocab;
  for (std::size_t r = 0; r < vocab.size(); ++r) m.embedding.index.emplace(vocab[r], r);
  m.embedding.learning_rate = loaded.config.emb_lr;
  // Shapes come from the manifest; tensors must match them.
  Rng unused(0);
  m.cell = LstmWeights<T>::init(hidden, input, unused);
  m.output = OutputLayer<T>::init(kNumClasses, hidden, unused);
  m.embedding.matrix = Parameter<T>("embedding", Tensor<T>({std::max<std::size_t>(vocab.size(), 1), input}));
  for (Parameter<T>* p : m.parameters()) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) throw FormatError("checkpoint lacks tensor '" + p->name + "'");
    if (it->second.shape() != p->value.shape()) {
      throw FormatError("tensor '" + p->name + "' has shape " + shape_string(it->second.shape()) +
                        ", manifest implies " + shape_string(p->value.shape()));
    }
    *p = Parameter<T>(p->name, std::move(it->second));
    tensors.erase(it);
  }
  if (!tensors.empty()) {
    throw FormatError("checkpoint has unexpected tensor '" + tensors.begin()->first + "'");
  }
  return loaded;
}

template <std::floating_point T>
LoadedModel<T> load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  try {
    return load_checkpoint<T>(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

template <std::floating_point T>
TreeLstmModel<float> to_float32(const TreeLstmModel<T>& model) {
  TreeLstmModel<float> out;
  out.options = model.options;
  out.embedding.forms = model.embedding.forms;
  out.embedding.index = model.embedding.index;
  out.embedding.learning_rate = model.embedding.learning_rate;
  Rng unused(0);
  out.cell = LstmWeights<float>::init(model.hidden_size(), model.input_size(), unused);
  out.output = OutputLayer<float>::init(kNumClasses, model.hidden_size(), unused);
  out.embedding.matrix = Parameter<float>("embedding", model.embedding.matrix.value.template cast<float>());
  const auto src = named_params(model);
  auto dst = out.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    *dst[i] = Parameter<float>(src[i]->name, src[i]->value.template cast<float>());
  }
  return out;
}

#define TREEZONE_INSTANTIATE(T)                                                                 \
  template void save_checkpoint<T>(std::ostream&, const TreeLstmModel<T>&, const TrainConfig&); \
  template void save_checkpoint_file<T>(const std::string&, const TreeLstmModel<T>&,            \
                                        const TrainConfig&);                                    \
  template LoadedModel<T> load_checkpoint<T>(std::istream&);                                    \
  template LoadedModel<T> load_checkpoint_file<T>(const std::string&);                          \
  template TreeLstmModel<float> to_float32<T>(const TreeLstmModel<T>&);

TREEZONE_INSTANTIATE(float)
TREEZONE_INSTANTIATE(double)
#undef TREEZONE_INSTANTIATE

}  // namespace treezone
