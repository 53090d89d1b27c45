// Copyright 2026 The pathgibbs Authors
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

#include <array>
#include <cstdint>
#include <limits>

namespace pathgibbs {

// Philox4x32-10 (Salmon, Moraes, Dror, Shaw; SC'11). Pure function of
// (counter, key); everything stateful lives in Rng below.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter bijection(Counter ctr, Key key) noexcept;
};

// Stream tags keep the substreams of unrelated consumers disjoint even when
// they share a master seed and an index.
enum class StreamDomain : std::uint16_t {
  kChain = 1,
  kFieldReplica = 2,
  kKvTrajectory = 3,
  kTest = 4,
  kCli = 5,
};

/// Counter-based random stream.
///
/// The key is derived from the master seed; the upper 64 counter bits hold the
/// stream id and the lower 64 bits count blocks. Two streams with different
/// ids never share a counter value, so they are independent for as long as
/// either draws fewer than 2^64 blocks. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream) noexcept;

  static Rng stream(std::uint64_t seed, StreamDomain domain, std::uint64_t index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  /// Exponential with unit rate.
  double exponential() noexcept;

  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace pathgibbs
