// Copyright 2026 The gtpar Authors. All Rights Reserved.
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

#include "gtpar/errors.hpp"
#include "gtpar/types.hpp"

namespace gtpar {

// Seeded generator whose output sequence is fixed across platforms:
// mt19937_64 is fully specified, and the mappings below avoid the
// implementation-defined standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform in [0, n), unbiased.
  Index index(Index n) {
    if (n <= 0) throw ArgumentError("Rng::index needs n > 0");
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return static_cast<Index>(v % un);
  }

  // Uniform in [lo, hi], inclusive.
  Index between(Index lo, Index hi) { return lo + index(hi - lo + 1); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gtpar
