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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "model/config.h"

namespace tppsd::model {

inline constexpr int kCheckpointFormatVersion = 1;

// Parameter names. Projection matrices are stored as (out x in), so a
// projection of a column vector x is W x.
namespace param {
inline const std::string kMarkEmbedding = "mark_embedding";  // K x D
inline const std::string kSahpFrequency = "sahp_frequency";  // 1 x D
inline const std::string kBeginContext = "begin_context";    // 1 x D
inline const std::string kDecoder = "decoder";               // 3D x D
inline const std::string kWeightProj = "head.weight.V";      // M x D
inline const std::string kWeightBias = "head.weight.b";      // 1 x M
inline const std::string kMeanProj = "head.mean.V";
inline const std::string kMeanBias = "head.mean.b";
inline const std::string kScaleProj = "head.scale.V";
inline const std::string kScaleBias = "head.scale.b";
inline const std::string kMarkHidden = "mark.V1";      // D x D
inline const std::string kMarkHiddenBias = "mark.b1";  // 1 x D
inline const std::string kMarkOut = "mark.V2";         // K x D
inline const std::string kMarkOutBias = "mark.b2";     // 1 x K
std::string query(int layer);  // D x attention_input_dim
std::string key(int layer);
std::string value(int layer);
}  // namespace param

struct Checkpoint {
  ModelConfig config;
  std::map<std::string, ad::Tensor> tensors;

  const ad::Tensor& at(const std::string& name) const;
  ad::Tensor& at(const std::string& name);

  // Throws unless every expected tensor is present, shaped per config and
  // finite, and no unexpected tensor exists.
  void validate() const;
};

// Expected (name, rows, cols) triples for a configuration, in a fixed order.
struct TensorSpec {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};
std::vector<TensorSpec> expected_tensors(const ModelConfig& config);

// Matrices uniform in [-1/sqrt(D), 1/sqrt(D)], biases zero, SAHP frequencies 1.
Checkpoint initialize_checkpoint(const ModelConfig& config, std::uint64_t seed);

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

}  // namespace tppsd::model
