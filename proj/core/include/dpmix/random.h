//
// Copyright 2026 The dpmix Authors
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
//

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dpmix {

// Deterministic pseudo-random source (splitmix64). All randomness in the
// system flows through this class so that runs replay bit-for-bit from a
// seed; the standard library distributions are avoided because their output
// is implementation-defined.
//
// Not cryptographic. Callers own the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  // Independent stream for one query (or one sweep run) of a session, so a
  // query can be recomputed without replaying its predecessors.
  static Rng derive(std::uint64_t session_seed, std::uint64_t stream_index);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();

  // Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
  // so the draw count per operation is fixed.
  double gaussian();

  bool bernoulli(double p);

  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t next_below(std::uint64_t n);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace dpmix
