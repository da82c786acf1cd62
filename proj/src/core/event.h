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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tppsd {

// A single (time, mark) pair. Marks are 0-based.
struct Event {
  double time = 0.0;
  int mark = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

// Time-sorted events observed on (0, t_end].
struct EventSequence {
  std::vector<Event> events;
  double t_end = 0.0;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
  double last_time() const noexcept {
    return events.empty() ? 0.0 : events.back().time;
  }

  friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::optional<std::size_t> index;
  std::string message;

  explicit operator bool() const noexcept { return ok; }
};

// Returns the first violated invariant, or ok. Checks finiteness and
// non-negativity of times, strict monotonicity, the horizon and mark range.
ValidationReport validate_sequence(const EventSequence& seq, int num_marks);

// Throws Error(kData) carrying the report message when validation fails.
void require_valid(const EventSequence& seq, int num_marks);

// Largest mark + 1 across a collection (0 when all sequences are empty).
int infer_num_marks(std::span<const EventSequence> sequences);

// Total number of events across a collection.
std::size_t total_events(std::span<const EventSequence> sequences);

}  // namespace tppsd
