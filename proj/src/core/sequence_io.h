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
#include <iosfwd>
#include <string>
#include <vector>

#include "core/event.h"

namespace tppsd {

// Line-delimited JSON: one {"t_end": T, "events": [[t, k], ...]} per line.
std::string sequence_to_json_line(const EventSequence& seq);
EventSequence sequence_from_json_line(const std::string& line);

void write_sequences(std::ostream& os, const std::vector<EventSequence>& seqs);
std::vector<EventSequence> read_sequences(std::istream& is);

void save_sequences(const std::filesystem::path& path,
                    const std::vector<EventSequence>& seqs);
std::vector<EventSequence> load_sequences(const std::filesystem::path& path);

}  // namespace tppsd
