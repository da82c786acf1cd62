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

#include <filesystem>
#include <string>

#include "classical/process.h"

namespace tppsd::classical {

inline constexpr int kProcessFormatVersion = 1;

// {"format_version": 1, "kind": "poisson", "A": 5, "b": 1, "omega": 0.02}
// {"format_version": 1, "kind": "hawkes", "mu": [...], "alpha": [[...]], "beta": [[...]]}
// Univariate Hawkes may give mu, alpha and beta as scalars.
ProcessParams process_params_from_json(const std::string& text);
std::string process_params_to_json(const ProcessParams& params);

ProcessParams load_process_params(const std::filesystem::path& path);

}  // namespace tppsd::classical
