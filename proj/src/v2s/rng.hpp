// Copyright 2026 The V2S Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "v2s/common.hpp"

namespace v2s {

// 64-bit FNV-1a, used for stream names and config hashing.
uint64_t fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

uint64_t splitmix64(uint64_t x);

// Seed of the named sub-stream `stream` of `seed`. Every random decision in
// the pipeline draws from such a stream so there is no shared RNG state.
uint64_t derive_seed(uint64_t seed, std::string_view stream, uint64_t index = 0);

// mt19937_64 with portable conversions (std distributions are
// implementation-defined, these are not).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  Rng(uint64_t seed, std::string_view stream, uint64_t index = 0)
      : engine_(derive_seed(seed, stream, index)) {}

  uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }
  Vec3 unit_vector();

 private:
  std::mt19937_64 engine_;
};

}  // namespace v2s
