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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dpmix/accountant.h"
#include "dpmix/prob_dist.h"
#include "dpmix/random.h"
#include "dpmix/screening.h"

namespace dpmix {

enum class DecodingMode { kAdaptive, kBaseline };

struct DecodingConfig {
  RenyiOrder alpha;
  // Per-member projection radius parameter; the ball radius is beta * alpha.
  double beta;
  std::size_t ensemble_size;
  ScreeningConfig screening;
  double delta;
  DecodingMode mode;
  std::optional<BaselineConfig> baseline;
  std::uint64_t seed;

  // Throws std::invalid_argument naming the offending field. Baseline mode
  // requires a baseline config and an integral order (the subsampling bound
  // is stated for whole orders only).
  void validate(std::size_t vocab_size) const;
};

// Everything one decoded query produced. `output_dist` is the distribution
// the token was sampled from (public on a failed screen, the projected
// mixture otherwise); `output_dist_digest` is its stable checksum for replay
// audits.
struct QueryOutcome {
  std::int32_t token;
  bool screened_out;
  double eps_screen;
  double eps_decode;
  // Realized per-member mixing weights; all zero when screened out or for
  // members outside the subsampled subset.
  std::vector<double> lambdas;
  std::uint64_t output_dist_digest;
  ProbDist output_dist;
  double alpha;
  bool eps_decode_clamped = false;
};

// Fetches the distribution of ensemble member i for the current query.
using DistProvider = std::function<ProbDist(std::size_t)>;

// One adaptive query: screen; on failure sample from the public
// distribution and charge the screening cost only; on success project every
// member onto the beta*alpha ball, average, charge screening plus the
// data-dependent loss, and sample from the average. The outcome is recorded
// in the ledger.
QueryOutcome decode_adaptive(std::span<const ProbDist> private_dists,
                             const ProbDist& p_public,
                             const DecodingConfig& cfg, PrivacyLedger& ledger,
                             Rng& rng);

// One baseline query: Poisson-subsample the ensemble, pick the largest
// radius whose subsampled data-independent loss fits the per-query budget,
// project the sampled members, average and sample (the public distribution
// when the subset is empty). Charges eps_budget / query_budget regardless of
// the subset.
QueryOutcome decode_baseline(const DistProvider& private_dists_provider,
                             const ProbDist& p_public,
                             const DecodingConfig& cfg, PrivacyLedger& ledger,
                             Rng& rng);

// Largest beta whose subsampled data-independent loss at order alpha for an
// ensemble of n members stays within eps_per_query. Bisection against
// subsampled_loss, tolerance 1e-9 in the loss.
double select_beta_subsampled(double eps_per_query, double q, int alpha,
                              std::size_t n);

// Inverse-CDF sample from dist with a single uniform draw.
std::int32_t sample_token(const ProbDist& dist, Rng& rng);

// FNV-1a over the byte representation of the probabilities.
std::uint64_t distribution_digest(const ProbDist& dist);

}  // namespace dpmix
