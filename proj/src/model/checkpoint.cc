// Copyright 2026 The tppsd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "model/checkpoint.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.h"
#include "core/rng.h"
#include "json.hpp"

namespace tppsd::model {

using nlohmann::json;

namespace param {
std::string query(int layer) { return "layer" + std::to_string(layer) + ".query"; }
std::string key(int layer) { return "layer" + std::to_string(layer) + ".key"; }
std::string value(int layer) { return "layer" + std::to_string(layer) + ".value"; }
}  // namespace param

namespace {

bool is_bias(const std::string& name) {
  return name == param::kWeightBias || name == param::kMeanBias ||
         name == param::kScaleBias || name == param::kMarkHiddenBias ||
         name == param::kMarkOutBias;
}

json config_json(const ModelConfig& c) {
  return json{{"D", c.dim},
              {"M", c.num_components},
              {"K", c.num_marks},
              {"n_heads", c.num_heads},
              {"n_layers", c.num_layers},
              {"encoding", to_string(c.encoding)},
              {"attention", to_string(c.attention)},
              {"attnhp_m", c.attnhp_m},
              {"attnhp_M", c.attnhp_scale}};
}

ModelConfig parse_config(const json& j) {
  ModelConfig c;
  c.dim = j.value("D", c.dim);
  c.num_components = j.value("M", c.num_components);
  c.num_marks = j.value("K", c.num_marks);
  c.num_heads = j.value("n_heads", c.num_heads);
  c.num_layers = j.value("n_layers", c.num_layers);
  c.encoding = parse_encoding(j.value("encoding", to_string(c.encoding)));
  c.attention = parse_attention(j.value("attention", to_string(c.attention)));
  c.attnhp_m = j.value("attnhp_m", c.attnhp_m);
  c.attnhp_scale = j.value("attnhp_M", c.attnhp_scale);
  for (const auto& [k, v] : j.items()) {
    static const std::set<std::string> known{"D", "M", "K", "n_heads", "n_layers",
                                             "encoding", "attention", "attnhp_m",
                                             "attnhp_M", "format_version"};
    if (!known.contains(k)) throw_data("unknown model config field '" + k + "'");
  }
  c.validate();
  return c;
}

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw_data(std::string("cannot open ") + what + ": " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

}  // namespace

const ad::Tensor& Checkpoint::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw_data("checkpoint is missing tensor '" + name + "'");
  return it->second;
}

ad::Tensor& Checkpoint::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw_data("checkpoint is missing tensor '" + name + "'");
  return it->second;
}

std::vector<TensorSpec> expected_tensors(const ModelConfig& c) {
  const auto d = static_cast<std::size_t>(c.dim);
  const auto m = static_cast<std::size_t>(c.num_components);
  const auto k = static_cast<std::size_t>(c.num_marks);
  const auto in = static_cast<std::size_t>(c.attention_input_dim());
  std::vector<TensorSpec> specs{{param::kMarkEmbedding, k, d},
                                {param::kBeginContext, 1, d}};
  if (c.encoding == Encoding::kSahp) specs.push_back({param::kSahpFrequency, 1, d});
  for (int l = 0; l < c.num_layers; ++l) {
    specs.push_back({param::query(l), d, in});
    specs.push_back({param::key(l), d, in});
    specs.push_back({param::value(l), d, in});
  }
  specs.insert(specs.end(), {{param::kDecoder, 3 * d, d},
                             {param::kWeightProj, m, d},
                             {param::kWeightBias, 1, m},
                             {param::kMeanProj, m, d},
                             {param::kMeanBias, 1, m},
                             {param::kScaleProj, m, d},
                             {param::kScaleBias, 1, m},
                             {param::kMarkHidden, d, d},
                             {param::kMarkHiddenBias, 1, d},
                             {param::kMarkOut, k, d},
                             {param::kMarkOutBias, 1, k}});
  return specs;
}

void Checkpoint::validate() const {
  config.validate();
  const auto specs = expected_tensors(config);
  for (const auto& spec : specs) {
    const ad::Tensor& t = at(spec.name);
    if (t.rows() != spec.rows || t.cols() != spec.cols) {
      throw_data("tensor '" + spec.name + "' has shape " + std::to_string(t.rows()) + "x" +
                 std::to_string(t.cols()) + ", expected " + std::to_string(spec.rows) +
                 "x" + std::to_string(spec.cols));
    }
    if (!t.all_finite()) throw_data("tensor '" + spec.name + "' has non-finite values");
  }
  if (tensors.size() != specs.size()) {
    for (const auto& [name, _] : tensors) {
      bool found = false;
      for (const auto& spec : specs) found = found || spec.name == name;
      if (!found) throw_data("unexpected tensor '" + name + "' in checkpoint");
    }
  }
}

Checkpoint initialize_checkpoint(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Checkpoint ckpt{config, {}};
  RngStream rng = RngStream(seed, 0).substream(stream_tag::kInit);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.dim));
  for (const auto& spec : expected_tensors(config)) {
    ad::Tensor t(spec.rows, spec.cols);
    if (spec.name == param::kSahpFrequency) {
      t.fill(1.0);
    } else if (!is_bias(spec.name)) {
      for (double& v : t.values()) v = (2.0 * rng.uniform01() - 1.0) * bound;
    }
    ckpt.tensors.emplace(spec.name, std::move(t));
  }
  return ckpt;
}

std::string config_to_json(const ModelConfig& config) {
  json j = config_json(config);
  j["format_version"] = kCheckpointFormatVersion;
  return j.dump(2);
}

ModelConfig config_from_json(const std::string& text) {
  try {
    return parse_config(json::parse(text));
  } catch (const json::exception& ex) {
    throw_data(std::string("malformed model config: ") + ex.what());
  }
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["config"] = config_json(ckpt.config);
  json tensors = json::object();
  for (const auto& [name, t] : ckpt.tensors) {
    tensors[name] = json{{"shape", json::array({t.rows(), t.cols()})},
                         {"values", t.storage()}};
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  Checkpoint ckpt;
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw_data("unsupported checkpoint format_version " + std::to_string(version) +
                 " (expected " + std::to_string(kCheckpointFormatVersion) + ")");
    }
    ckpt.config = parse_config(doc.at("config"));
    for (const auto& [name, entry] : doc.at("tensors").items()) {
      auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      auto values = entry.at("values").get<std::vector<double>>();
      ckpt.tensors.emplace(name, ad::Tensor(std::move(shape), std::move(values)));
    }
  } catch (const json::exception& ex) {
    throw_data(std::string("malformed checkpoint: ") + ex.what());
  } catch (const Error& ex) {
    throw_data(std::string("invalid checkpoint: ") + ex.what());
  }
  ckpt.validate();
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw_data("cannot open for writing: " + path.string());
  os << checkpoint_to_json(ckpt) << '\n';
  if (!os) throw_data("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_file(path, "checkpoint"));
}

}  // namespace tppsd::model
