// Copyright 2026 The spikenas Authors.
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

namespace spikenas {

/// SplitMix64 generator (Steele, Lea & Flood 2014).
///
/// state += 0x9e3779b97f4a7c15; z = state;
/// z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
/// z = (z ^ (z >> 27)) * 0x94d049bb133111eb;
/// return z ^ (z >> 31);
///
/// Integer and uniform streams are bit-identical on every platform. Uniform
/// doubles take the top 53 bits; bounded integers use rejection sampling;
/// normals use the Box-Muller transform (relies on libm log/cos/sin).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Standard normal.
  double normal() noexcept;

  /// Independent stream keyed on (current seed material, key). Does not
  /// advance this generator.
  Rng fork(std::uint64_t key) const noexcept;

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes several integers into one seed (SplitMix finalizer chain).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace spikenas
