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

#include "classical/process_io.h"

#include <fstream>
#include <sstream>

#include "core/error.h"
#include "json.hpp"

namespace tppsd::classical {

using nlohmann::json;

namespace {

std::vector<double> as_vector(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

std::vector<std::vector<double>> as_matrix(const json& j) {
  if (j.is_number()) return {{j.get<double>()}};
  return j.get<std::vector<std::vector<double>>>();
}

}  // namespace

ProcessParams process_params_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.value("format_version", kProcessFormatVersion);
    if (version != kProcessFormatVersion) {
      throw_data("unsupported process format_version " + std::to_string(version));
    }
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "poisson") {
      return PoissonParams{doc.at("A").get<double>(), doc.at("b").get<double>(),
                           doc.at("omega").get<double>()};
    }
    if (kind == "hawkes") {
      return HawkesParams{as_vector(doc.at("mu")), as_matrix(doc.at("alpha")),
                          as_matrix(doc.at("beta"))};
    }
    throw_data("unknown process kind '" + kind + "'");
  } catch (const json::exception& ex) {
    throw_data(std::string("malformed process parameters: ") + ex.what());
  }
}

std::string process_params_to_json(const ProcessParams& params) {
  json doc;
  doc["format_version"] = kProcessFormatVersion;
  if (const auto* p = std::get_if<PoissonParams>(&params)) {
    doc["kind"] = "poisson";
    doc["A"] = p->A;
    doc["b"] = p->b;
    doc["omega"] = p->omega;
  } else {
    const auto& h = std::get<HawkesParams>(params);
    doc["kind"] = "hawkes";
    doc["mu"] = h.mu;
    doc["alpha"] = h.alpha;
    doc["beta"] = h.beta;
  }
  return doc.dump(2);
}

ProcessParams load_process_params(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw_data("cannot open process parameter file: " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return process_params_from_json(buf.str());
}

}  // namespace tppsd::classical
