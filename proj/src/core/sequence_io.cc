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

#include "core/sequence_io.h"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "core/error.h"
#include "json.hpp"

namespace tppsd {

using nlohmann::json;

std::string sequence_to_json_line(const EventSequence& seq) {
  json events = json::array();
  for (const auto& e : seq.events) events.push_back(json::array({e.time, e.mark}));
  json record;
  record["t_end"] = seq.t_end;
  record["events"] = std::move(events);
  return record.dump();
}

EventSequence sequence_from_json_line(const std::string& line) {
  EventSequence seq;
  try {
    const json record = json::parse(line);
    seq.t_end = record.at("t_end").get<double>();
    for (const auto& pair : record.at("events")) {
      if (!pair.is_array() || pair.size() != 2) {
        throw_data("event must be a [time, mark] pair");
      }
      seq.events.push_back(Event{pair[0].get<double>(), pair[1].get<int>()});
    }
  } catch (const json::exception& ex) {
    throw_data(std::string("malformed sequence record: ") + ex.what());
  }
  // Mark cardinality is unknown here; only the lower bound is checked.
  require_valid(seq, std::numeric_limits<int>::max());
  return seq;
}

void write_sequences(std::ostream& os, const std::vector<EventSequence>& seqs) {
  for (const auto& s : seqs) os << sequence_to_json_line(s) << '\n';
}

std::vector<EventSequence> read_sequences(std::istream& is) {
  std::vector<EventSequence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sequence_from_json_line(line));
    } catch (const Error& ex) {
      throw_data("line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

void save_sequences(const std::filesystem::path& path,
                    const std::vector<EventSequence>& seqs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw_data("cannot open for writing: " + path.string());
  write_sequences(os, seqs);
  if (!os) throw_data("write failed: " + path.string());
}

std::vector<EventSequence> load_sequences(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw_data("cannot open sequence file: " + path.string());
  return read_sequences(is);
}

}  // namespace tppsd
