// Copyright 2026 The AMTRL Authors. All rights reserved.
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

namespace amtrl {

/// Mixes a stream key into a 64-bit seed (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t x);

/// Derives an independent stream seed from a master seed and a key path.
/// Streams keyed by distinct (master, a, b) tuples do not depend on the order
/// in which they are created.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// A seeded engine for one stream.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0)
      : engine_(stream_seed(master, a, b)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Stream domains so that instance construction and task sampling never share
// a stream even when seeds coincide.
inline constexpr std::uint64_t kInstanceDomain = 0x696e7374ULL;
inline constexpr std::uint64_t kSampleDomain = 0x73616d70ULL;
inline constexpr std::uint64_t kAuxDomain = 0x61757869ULL;

}  // namespace amtrl
