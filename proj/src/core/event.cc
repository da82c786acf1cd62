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

#include "core/event.h"

#include <algorithm>
#include <cmath>

#include "core/error.h"

namespace tppsd {

namespace {

ValidationReport fail(std::size_t index, std::string message) {
  return ValidationReport{false, index, std::move(message)};
}

}  // namespace

ValidationReport validate_sequence(const EventSequence& seq, int num_marks) {
  if (!(std::isfinite(seq.t_end) && seq.t_end > 0.0)) {
    return ValidationReport{false, std::nullopt, "t_end must be positive and finite"};
  }
  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    const Event& e = seq.events[i];
    if (!std::isfinite(e.time) || e.time < 0.0) {
      return fail(i, "negative or non-finite time at index " + std::to_string(i));
    }
    if (i > 0 && !(e.time > seq.events[i - 1].time)) {
      return fail(i, "non-monotone at index " + std::to_string(i));
    }
    if (e.time > seq.t_end) {
      return fail(i, "time exceeds horizon at index " + std::to_string(i));
    }
    if (e.mark < 0 || e.mark >= num_marks) {
      return fail(i, "mark out of range at index " + std::to_string(i));
    }
  }
  return {};
}

void require_valid(const EventSequence& seq, int num_marks) {
  if (auto report = validate_sequence(seq, num_marks); !report) {
    throw_data(report.message);
  }
}

int infer_num_marks(std::span<const EventSequence> sequences) {
  int k = 0;
  for (const auto& s : sequences) {
    for (const auto& e : s.events) k = std::max(k, e.mark + 1);
  }
  return k;
}

std::size_t total_events(std::span<const EventSequence> sequences) {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.events.size();
  return n;
}

}  // namespace tppsd
