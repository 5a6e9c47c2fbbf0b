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
#include <cstdint>
#include <span>
#include <vector>

#include "dpmix/prob_dist.h"
#include "dpmix/random.h"

namespace dpmix {

// Floor applied to noised probabilities before re-scaling. Gaussian noise can
// push entries negative, which would make the divergence undefined; lifting
// them to a tiny positive value is post-processing and costs no privacy.
inline constexpr double kNoiseFloor = 1e-12;

struct ScreeningConfig {
  // Mixing weight of the private ensemble mean in the screening mixture.
  // Kept small so the screen itself leaks little. In (0, 1].
  double lambda_screen;
  // Standard deviation of the Gaussian noise added per retained coordinate.
  double sigma;
  // Divergence threshold T. +inf accepts everything; -inf is the "always
  // fail" sentinel that routes every query to the public model.
  double threshold;
  // Number of public-model top indices retained. In [2, |V|].
  std::size_t top_k;
  RenyiOrder alpha;
  // Check with the symmetric divergence instead of the one-directional one.
  // Off by default.
  bool use_symmetric_divergence = false;
  // Test hook: skip the noise (and the negative-entry floor that only exists
  // because of it).
  bool disable_noise = false;

  // Throws std::invalid_argument naming the offending field.
  void validate(std::size_t vocab_size) const;
};

struct ScreeningVerdict {
  // True when the noisy divergence stayed at or below the threshold, i.e.
  // the query proceeds to private decoding.
  bool passed;
  double noisy_divergence;
  // RDP cost of the screen at the configured order. A function of the
  // parameters only, independent of the realized noise:
  // (lambda / (N * sigma))^2 * alpha.
  double eps_cost;
  std::uint64_t rng_seed_used;
};

// Indices of the k largest entries of p, ties broken toward the lowest
// vocabulary id. Returned in ascending id order.
std::vector<std::size_t> top_k_indices(const ProbDist& p, std::size_t k);

// The noisy screen: mixes each private distribution into the public one with
// weight lambda_screen, averages, truncates both the mixture and the public
// distribution to the public model's top-k support, noises the private side,
// re-scales both, and compares their Rényi divergence against the threshold.
// Inputs are never mutated.
ScreeningVerdict screen(std::span<const ProbDist> private_dists,
                        const ProbDist& p_public, const ScreeningConfig& cfg,
                        Rng& rng);

// (lambda_screen / (n * sigma))^2 * alpha: the per-query RDP cost of the
// screen for an ensemble of n models.
double screening_eps(double lambda_screen, std::size_t n, double sigma,
                     RenyiOrder alpha);

}  // namespace dpmix
