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

#include <string>

namespace tppsd::model {

enum class Encoding { kThp, kSahp, kAttNhp };
enum class Attention { kStandard, kAttNhp };

std::string to_string(Encoding e);
std::string to_string(Attention a);
Encoding parse_encoding(const std::string& s);
Attention parse_attention(const std::string& s);

struct ModelConfig {
  int dim = 16;            // D, even
  int num_components = 8;  // M, log-normal mixture size
  int num_marks = 1;       // K
  int num_heads = 1;       // divides D
  int num_layers = 1;
  Encoding encoding = Encoding::kThp;
  Attention attention = Attention::kStandard;
  // Only used by the AttNHP temporal encoding.
  double attnhp_m = 1.0;
  double attnhp_scale = 2000.0;

  int head_dim() const noexcept { return dim / num_heads; }
  // Width of the attention input: h, or concat(1, z, h) for AttNHP attention.
  int attention_input_dim() const noexcept {
    return attention == Attention::kAttNhp ? 2 * dim + 1 : dim;
  }

  // Throws Error(kUsage) describing the first violated constraint.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace tppsd::model
