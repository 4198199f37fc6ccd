// Copyright 2026 The rsoc Authors.
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

#ifndef RSOC_RANDOM_HPP
#define RSOC_RANDOM_HPP

#include <cstdint>
#include <random>

namespace rsoc {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; maps (seed, stream) pairs to well-separated seeds.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng{derive_seed(seed, stream)}; }

/// Independent child stream of an existing generator, for handing to a worker.
[[nodiscard]] inline Rng split(Rng& parent) { return Rng{derive_seed(parent(), 0)}; }

}  // namespace rsoc

#endif  // RSOC_RANDOM_HPP
