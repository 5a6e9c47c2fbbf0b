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

#include "dpmix/screening.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dpmix/divergence.h"

namespace dpmix {

void ScreeningConfig::validate(std::size_t vocab_size) const {
  if (!(lambda_screen > 0.0 && lambda_screen <= 1.0)) {
    throw std::invalid_argument("ScreeningConfig: lambda must be in (0, 1]");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("ScreeningConfig: sigma must be positive");
  }
  if (std::isnan(threshold)) {
    throw std::invalid_argument("ScreeningConfig: T must not be NaN");
  }
  if (top_k < 2) {
    throw std::invalid_argument("ScreeningConfig: top_k must be at least 2");
  }
  if (top_k > vocab_size) {
    throw std::invalid_argument("ScreeningConfig: top_k exceeds vocabulary size");
  }
}

std::vector<std::size_t> top_k_indices(const ProbDist& p, std::size_t k) {
  if (k > p.size()) {
    throw std::invalid_argument("top_k_indices: k exceeds vocabulary size");
  }
  std::vector<std::size_t> ids(p.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::partial_sort(ids.begin(), ids.begin() + k, ids.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (p[a] != p[b]) return p[a] > p[b];
                      return a < b;  // ties: lowest vocabulary id wins
                    });
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double screening_eps(double lambda_screen, std::size_t n, double sigma,
                     RenyiOrder alpha) {
  if (n == 0) throw std::invalid_argument("screening_eps: n must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("screening_eps: sigma must be positive");
  const double ratio = lambda_screen / (static_cast<double>(n) * sigma);
  return ratio * ratio * alpha.value();
}

ScreeningVerdict screen(std::span<const ProbDist> private_dists,
                        const ProbDist& p_public, const ScreeningConfig& cfg,
                        Rng& rng) {
  const std::size_t n = private_dists.size();
  if (n == 0) throw std::invalid_argument("screen: empty ensemble");
  cfg.validate(p_public.size());
  for (const ProbDist& p : private_dists) {
    if (p.size() != p_public.size()) {
      throw std::invalid_argument("screen: dimension mismatch in ensemble");
    }
  }

  ScreeningVerdict verdict;
  verdict.eps_cost = screening_eps(cfg.lambda_screen, n, cfg.sigma, cfg.alpha);
  verdict.rng_seed_used = rng.seed();

  // Screening mixture: (1/N) sum_i [lambda p_i + (1 - lambda) p_0], which is
  // lambda * mean(p_i) + (1 - lambda) * p_0. Fixed summation order over i.
  const std::size_t v = p_public.size();
  std::vector<double> mixture(v, 0.0);
  for (const ProbDist& p : private_dists) {
    for (std::size_t x = 0; x < v; ++x) mixture[x] += p[x];
  }
  const double lam = cfg.lambda_screen;
  for (std::size_t x = 0; x < v; ++x) {
    mixture[x] = lam * (mixture[x] / static_cast<double>(n)) + (1.0 - lam) * p_public[x];
  }

  // Restrict both sides to the public model's top-k support (everything else
  // is zeroed, so only the retained coordinates are noised), in ascending id
  // order so the noise draws are reproducible.
  const std::vector<std::size_t> kept = top_k_indices(p_public, cfg.top_k);
  std::vector<double> priv_k(kept.size());
  std::vector<double> pub_k(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    priv_k[j] = mixture[kept[j]];
    pub_k[j] = p_public[kept[j]];
  }

  if (!cfg.disable_noise) {
    for (double& x : priv_k) x += cfg.sigma * rng.gaussian();
    for (double& x : priv_k) x = std::max(x, kNoiseFloor);
  }

  const double priv_sum = std::accumulate(priv_k.begin(), priv_k.end(), 0.0);
  const double pub_sum = std::accumulate(pub_k.begin(), pub_k.end(), 0.0);
  if (!(priv_sum > 0.0) || !(pub_sum > 0.0)) {
    // Nothing left to re-scale; fall back to the public answer.
    verdict.passed = false;
    verdict.noisy_divergence = std::numeric_limits<double>::infinity();
    return verdict;
  }
  for (double& x : priv_k) x /= priv_sum;
  for (double& x : pub_k) x /= pub_sum;

  const ProbDist priv_restricted{std::move(priv_k)};
  const ProbDist pub_restricted{std::move(pub_k)};
  verdict.noisy_divergence =
      cfg.use_symmetric_divergence
          ? renyi_divergence_sym(priv_restricted, pub_restricted, cfg.alpha)
          : renyi_divergence(priv_restricted, pub_restricted, cfg.alpha);
  verdict.passed = verdict.noisy_divergence <= cfg.threshold;
  return verdict;
}

}  // namespace dpmix
