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

#include <cstddef>
#include <span>
#include <vector>

namespace dpmix {

// Acceptable deviation of a probability vector's sum from 1. Vectors outside
// this tolerance are rejected on construction, never silently renormalized.
inline constexpr double kNormalizationTolerance = 1e-9;

// Rényi divergence order. Strictly greater than 1; the KL limit (alpha -> 1)
// is out of scope.
class RenyiOrder {
 public:
  explicit RenyiOrder(double alpha);

  double value() const { return alpha_; }

  // True when the order is a whole number (required by the Poisson
  // subsampling amplification bound).
  bool is_integral() const;

 private:
  double alpha_;
};

// A probability vector over a fixed vocabulary, indexed by vocabulary id.
// The universal currency of the system: every model output, mixture, and
// projection is a ProbDist.
class ProbDist {
 public:
  // Validates: non-empty, every entry finite and >= 0, entries summing to 1
  // within kNormalizationTolerance. Throws std::invalid_argument otherwise.
  explicit ProbDist(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const { return probs_; }

  // Convex combination w * a + (1 - w) * b, entrywise. Requires w in [0, 1]
  // and matching sizes.
  static ProbDist mix(double w, const ProbDist& a, const ProbDist& b);

  static ProbDist uniform(std::size_t n);
  static ProbDist point_mass(std::size_t n, std::size_t index);

  friend bool operator==(const ProbDist& a, const ProbDist& b) {
    return a.probs_ == b.probs_;
  }

 private:
  std::vector<double> probs_;
};

}  // namespace dpmix
