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

#include "model/config.h"

#include "core/error.h"

namespace tppsd::model {

std::string to_string(Encoding e) {
  switch (e) {
    case Encoding::kThp: return "thp";
    case Encoding::kSahp: return "sahp";
    case Encoding::kAttNhp: return "attnhp";
  }
  return "?";
}

std::string to_string(Attention a) {
  return a == Attention::kStandard ? "standard" : "attnhp";
}

Encoding parse_encoding(const std::string& s) {
  if (s == "thp") return Encoding::kThp;
  if (s == "sahp") return Encoding::kSahp;
  if (s == "attnhp") return Encoding::kAttNhp;
  throw_usage("unknown encoding variant '" + s + "' (expected thp, sahp or attnhp)");
}

Attention parse_attention(const std::string& s) {
  if (s == "standard") return Attention::kStandard;
  if (s == "attnhp") return Attention::kAttNhp;
  throw_usage("unknown attention variant '" + s + "' (expected standard or attnhp)");
}

void ModelConfig::validate() const {
  if (dim < 2 || dim % 2 != 0) throw_usage("model: D must be even and >= 2");
  if (num_components < 1) throw_usage("model: M must be >= 1");
  if (num_marks < 1) throw_usage("model: K must be >= 1");
  if (num_heads < 1 || dim % num_heads != 0) {
    throw_usage("model: n_heads must be >= 1 and divide D");
  }
  if (num_layers < 1) throw_usage("model: n_layers must be >= 1");
  if (!(attnhp_m > 0.0) || !(attnhp_scale > 0.0)) {
    throw_usage("model: attnhp m and M must be positive");
  }
}

}  // namespace tppsd::model
