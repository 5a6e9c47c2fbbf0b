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

#include "dpmix/prob_dist.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dpmix {

RenyiOrder::RenyiOrder(double alpha) : alpha_(alpha) {
  if (!std::isfinite(alpha) || alpha <= 1.0) {
    throw std::invalid_argument("RenyiOrder: alpha must be finite and > 1, got " +
                                std::to_string(alpha));
  }
}

bool RenyiOrder::is_integral() const {
  return alpha_ == std::floor(alpha_);
}

ProbDist::ProbDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("ProbDist: empty probability vector");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double v = probs_[i];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("ProbDist: entry " + std::to_string(i) +
                                  " is negative or not finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("ProbDist: entries sum to " + std::to_string(sum) +
                                ", outside tolerance of 1");
  }
}

ProbDist ProbDist::mix(double w, const ProbDist& a, const ProbDist& b) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::invalid_argument("ProbDist::mix: weight must be in [0, 1]");
  }
  if (a.size() != b.size()) {
    throw std::invalid_argument("ProbDist::mix: dimension mismatch");
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = w * a.probs_[i] + (1.0 - w) * b.probs_[i];
  }
  return ProbDist(std::move(out));
}

ProbDist ProbDist::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("ProbDist::uniform: n must be positive");
  return ProbDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbDist ProbDist::point_mass(std::size_t n, std::size_t index) {
  if (index >= n) throw std::invalid_argument("ProbDist::point_mass: index out of range");
  std::vector<double> out(n, 0.0);
  out[index] = 1.0;
  return ProbDist(std::move(out));
}

}  // namespace dpmix
