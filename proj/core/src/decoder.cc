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

#include "dpmix/decoder.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dpmix/divergence.h"
#include "dpmix/projection.h"

namespace dpmix {
namespace {

ProbDist mean_of(std::span<const ProbDist> dists) {
  // The mean of identical distributions is that distribution; skipping the
  // accumulation keeps the equality exact instead of within rounding.
  const bool all_identical = std::all_of(
      dists.begin() + 1, dists.end(), [&](const ProbDist& p) { return p == dists[0]; });
  if (all_identical) return dists[0];
  const std::size_t v = dists.front().size();
  std::vector<double> out(v, 0.0);
  for (const ProbDist& p : dists) {
    for (std::size_t x = 0; x < v; ++x) out[x] += p[x];
  }
  for (double& x : out) x /= static_cast<double>(dists.size());
  return ProbDist(std::move(out));
}

}  // namespace

void DecodingConfig::validate(std::size_t vocab_size) const {
  if (ensemble_size == 0) {
    throw std::invalid_argument("DecodingConfig: N must be positive");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("DecodingConfig: beta must be finite and >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("DecodingConfig: delta must be in (0, 1)");
  }
  if (screening.alpha.value() != alpha.value()) {
    throw std::invalid_argument(
        "DecodingConfig: screening alpha must match the decoding alpha");
  }
  screening.validate(vocab_size);
  if (mode == DecodingMode::kBaseline) {
    if (!baseline.has_value()) {
      throw std::invalid_argument("DecodingConfig: baseline mode requires a baseline config");
    }
    baseline->validate();
    if (!alpha.is_integral() || alpha.value() < 2.0) {
      throw std::invalid_argument(
          "DecodingConfig: baseline mode requires an integer alpha >= 2");
    }
  }
}

std::int32_t sample_token(const ProbDist& dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::int32_t last_positive = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0.0) last_positive = static_cast<std::int32_t>(i);
    cum += dist[i];
    if (u < cum) return static_cast<std::int32_t>(i);
  }
  // u fell into the rounding gap below 1; return the last id with mass.
  return last_positive;
}

std::uint64_t distribution_digest(const ProbDist& dist) {
  std::uint64_t h = 14695981039346656037ull;
  for (double v : dist.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffull;
      h *= 1099511628211ull;
    }
  }
  return h;
}

QueryOutcome decode_adaptive(std::span<const ProbDist> private_dists,
                             const ProbDist& p_public,
                             const DecodingConfig& cfg, PrivacyLedger& ledger,
                             Rng& rng) {
  if (private_dists.size() != cfg.ensemble_size) {
    throw std::invalid_argument("decode_adaptive: ensemble size mismatch");
  }
  cfg.validate(p_public.size());

  const ScreeningVerdict verdict = screen(private_dists, p_public, cfg.screening, rng);

  QueryOutcome outcome{.token = 0,
                       .screened_out = !verdict.passed,
                       .eps_screen = verdict.eps_cost,
                       .eps_decode = 0.0,
                       .lambdas = std::vector<double>(cfg.ensemble_size, 0.0),
                       .output_dist_digest = 0,
                       .output_dist = p_public,
                       .alpha = cfg.alpha.value()};

  if (!verdict.passed) {
    // Failed screen: answer from the untruncated public distribution and
    // charge the screening cost only.
    outcome.token = sample_token(p_public, rng);
  } else {
    std::vector<ProbDist> projected;
    projected.reserve(private_dists.size());
    for (std::size_t i = 0; i < private_dists.size(); ++i) {
      ProjectionResult r = project(private_dists[i], p_public, cfg.alpha, cfg.beta);
      outcome.lambdas[i] = r.lambda;
      projected.push_back(std::move(r.projected));
    }
    const double loss = data_dependent_loss(projected, p_public, cfg.alpha);
    const CappedValue capped = cap_divergence(loss);
    outcome.eps_decode = capped.value;
    outcome.eps_decode_clamped = capped.clamped;
    outcome.output_dist = mean_of(projected);
    outcome.token = sample_token(outcome.output_dist, rng);
  }
  outcome.output_dist_digest = distribution_digest(outcome.output_dist);
  ledger.record(outcome);
  return outcome;
}

double select_beta_subsampled(double eps_per_query, double q, int alpha,
                              std::size_t n) {
  if (!(eps_per_query > 0.0)) {
    throw std::invalid_argument("select_beta_subsampled: eps_per_query must be positive");
  }
  if (n == 0) {
    throw std::invalid_argument("select_beta_subsampled: n must be positive");
  }
  const auto loss_at = [&](double beta) {
    return subsampled_loss(
        [&](int k) { return data_independent_bound(RenyiOrder(k), beta, n); }, q,
        alpha);
  };

  constexpr double kEpsTolerance = 1e-9;
  // Bracket the boundary: the loss is 0 at beta = 0 and grows without bound.
  double lo = 0.0;
  double hi = 0.25;
  while (loss_at(hi) <= eps_per_query) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (loss_at(mid) <= eps_per_query) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (eps_per_query - loss_at(lo) <= kEpsTolerance) break;
  }
  return lo;
}

QueryOutcome decode_baseline(const DistProvider& private_dists_provider,
                             const ProbDist& p_public,
                             const DecodingConfig& cfg, PrivacyLedger& ledger,
                             Rng& rng) {
  cfg.validate(p_public.size());
  const BaselineConfig& bc = *cfg.baseline;
  const double per_query = bc.eps_budget / static_cast<double>(bc.query_budget);

  // Poisson subsampling, fixed member order.
  std::vector<std::size_t> subset;
  for (std::size_t i = 0; i < cfg.ensemble_size; ++i) {
    if (rng.bernoulli(bc.subsample_q)) subset.push_back(i);
  }

  QueryOutcome outcome{.token = 0,
                       .screened_out = false,
                       .eps_screen = 0.0,
                       .eps_decode = per_query,
                       .lambdas = std::vector<double>(cfg.ensemble_size, 0.0),
                       .output_dist_digest = 0,
                       .output_dist = p_public,
                       .alpha = cfg.alpha.value()};

  if (!subset.empty()) {
    const double beta = select_beta_subsampled(
        per_query, bc.subsample_q, static_cast<int>(cfg.alpha.value()), subset.size());
    std::vector<ProbDist> projected;
    projected.reserve(subset.size());
    for (std::size_t i : subset) {
      const ProbDist p_i = private_dists_provider(i);
      ProjectionResult r = project(p_i, p_public, cfg.alpha, beta);
      outcome.lambdas[i] = r.lambda;
      projected.push_back(std::move(r.projected));
    }
    outcome.output_dist = mean_of(projected);
  }
  outcome.token = sample_token(outcome.output_dist, rng);
  outcome.output_dist_digest = distribution_digest(outcome.output_dist);
  ledger.record(outcome);
  return outcome;
}

}  // namespace dpmix
