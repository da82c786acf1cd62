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
#include <random>
#include <span>

namespace tppsd {

// Reproducible random stream keyed by (seed, stream id). Streams with
// distinct ids are seeded through a hashed seed sequence and are treated as
// independent. Substreams let one logical run hand separate, named sources to
// drafting, verification and residual sampling so that their consumption never
// depends on each other.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Fresh stream derived from this one's identity (not its position).
  RngStream substream(std::uint64_t tag) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double standard_normal() { return normal_(engine_); }

  // Index drawn with probability proportional to weights (need not sum to 1).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// SplitMix64 finaliser; used to derive stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Named substream tags.
namespace stream_tag {
inline constexpr std::uint64_t kDraft = 0x6472616674ULL;     // "draft"
inline constexpr std::uint64_t kVerify = 0x766572696679ULL;  // "verify"
inline constexpr std::uint64_t kResidual = 0x726573ULL;      // "res"
inline constexpr std::uint64_t kTarget = 0x746172ULL;        // "tar"
inline constexpr std::uint64_t kInit = 0x696e6974ULL;        // "init"
inline constexpr std::uint64_t kShuffle = 0x73687566ULL;     // "shuf"
}  // namespace stream_tag

}  // namespace tppsd
