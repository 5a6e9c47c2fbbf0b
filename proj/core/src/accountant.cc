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

#include "dpmix/accountant.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpmix/decoder.h"
#include "dpmix/divergence.h"
#include "dpmix/numeric.h"

namespace dpmix {

double data_dependent_loss(std::span<const ProbDist> projected,
                           const ProbDist& p_public, RenyiOrder alpha) {
  const std::size_t n = projected.size();
  if (n == 0) throw std::invalid_argument("data_dependent_loss: empty ensemble");
  const std::size_t v = p_public.size();
  for (const ProbDist& p : projected) {
    if (p.size() != v) {
      throw std::invalid_argument("data_dependent_loss: dimension mismatch");
    }
  }
  if (n == 1) {
    // The only neighboring ensemble is the empty one, which answers with the
    // public model.
    return renyi_divergence_sym(projected[0], p_public, alpha);
  }
  // Identical members make p and every p_{-i} the same distribution; the
  // summation order would otherwise smear that into last-ulp noise.
  const bool all_identical =
      std::all_of(projected.begin() + 1, projected.end(),
                  [&](const ProbDist& p) { return p == projected[0]; });
  if (all_identical) return 0.0;

  std::vector<double> total(v, 0.0);
  for (const ProbDist& p : projected) {
    for (std::size_t x = 0; x < v; ++x) total[x] += p[x];
  }
  std::vector<double> mean(v);
  for (std::size_t x = 0; x < v; ++x) mean[x] = total[x] / static_cast<double>(n);
  const ProbDist p_full{std::move(mean)};

  double worst = 0.0;
  std::vector<double> loo(v);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < v; ++x) {
      // total - projected[i] cannot go negative except by rounding.
      loo[x] = std::max(0.0, (total[x] - projected[i][x]) / static_cast<double>(n - 1));
    }
    const ProbDist p_without{loo};
    worst = std::max(worst, renyi_divergence_sym(p_full, p_without, alpha));
  }
  return worst;
}

double data_independent_bound(RenyiOrder alpha, double beta, std::size_t n) {
  if (n == 0) throw std::invalid_argument("data_independent_bound: n must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("data_independent_bound: beta must be >= 0");
  const double a = alpha.value();
  if (n == 1) return beta * a;
  if (beta == 0.0) return 0.0;
  const double exponent = 4.0 * beta * a * (a - 1.0);
  // log(n - 1 + e^exponent) without forming e^exponent.
  const double log_terms[] = {std::log(static_cast<double>(n - 1)), exponent};
  const double log_numerator = logsumexp(log_terms);
  return std::max(0.0, (log_numerator - std::log(static_cast<double>(n))) / (a - 1.0));
}

double subsampled_loss(const std::function<double(int)>& base_eps, double q,
                       int alpha) {
  if (alpha < 2) {
    throw std::invalid_argument("subsampled_loss: alpha must be an integer >= 2");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("subsampled_loss: q must be in [0, 1]");
  }
  // Exact algebraic collapses at the endpoints.
  if (q == 0.0) return 0.0;
  if (q == 1.0) return base_eps(alpha);

  const double a = static_cast<double>(alpha);
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);

  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(alpha));
  log_terms.push_back((a - 1.0) * log_1mq + std::log1p((a - 1.0) * q));
  for (int k = 2; k <= alpha; ++k) {
    log_terms.push_back(log_binomial(alpha, k) + (a - k) * log_1mq +
                        k * log_q + (k - 1.0) * base_eps(k));
  }
  return std::max(0.0, logsumexp(log_terms) / (a - 1.0));
}

double rdp_to_dp(double eps_rdp, RenyiOrder alpha, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("rdp_to_dp: delta must be in (0, 1)");
  }
  if (!(eps_rdp >= 0.0)) {
    throw std::invalid_argument("rdp_to_dp: eps_rdp must be >= 0");
  }
  const double a = alpha.value();
  return eps_rdp + std::log((a - 1.0) / a) - (std::log(delta) + std::log(a)) / (a - 1.0);
}

double select_beta(double eps_budget, std::size_t query_budget,
                   RenyiOrder alpha, std::size_t n) {
  if (!(eps_budget > 0.0)) {
    throw std::invalid_argument("select_beta: eps_budget must be positive");
  }
  if (query_budget == 0 || n == 0) {
    throw std::invalid_argument("select_beta: query_budget and n must be positive");
  }
  const double a = alpha.value();
  const double per_query = eps_budget / static_cast<double>(query_budget);
  if (n == 1) return per_query / a;

  const double x = (a - 1.0) * per_query;
  const double nn = static_cast<double>(n);
  // log(n e^x + 1 - n) = log1p(n expm1(x)); switch to the asymptote before
  // expm1 overflows.
  double log_arg;
  if (x < 700.0) {
    const double inner = nn * std::expm1(x);
    assert(inner > -1.0);  // positive for x > 0, n >= 1
    log_arg = std::log1p(inner);
  } else {
    log_arg = std::log(nn) + x + std::log1p((1.0 - nn) * std::exp(-x) / nn);
  }
  return log_arg / (4.0 * (a - 1.0) * a);
}

double utility_gap_bound(
    const std::vector<std::vector<double>>& lambdas,
    const std::vector<std::vector<double>>& private_likelihoods,
    const std::vector<double>& public_likelihoods) {
  if (lambdas.size() != private_likelihoods.size()) {
    throw std::invalid_argument("utility_gap_bound: matrix row mismatch");
  }
  double gap = 0.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const auto& row_lambda = lambdas[j];
    const auto& row_priv = private_likelihoods[j];
    if (row_lambda.size() != public_likelihoods.size() ||
        row_priv.size() != public_likelihoods.size()) {
      throw std::invalid_argument("utility_gap_bound: column count mismatch");
    }
    for (std::size_t t = 0; t < public_likelihoods.size(); ++t) {
      if (!(public_likelihoods[t] > 0.0) || !(row_priv[t] > 0.0)) {
        throw std::invalid_argument(
            "utility_gap_bound: likelihoods must be strictly positive");
      }
      const double term =
          (1.0 - row_lambda[t]) * std::log(row_priv[t] / public_likelihoods[t]);
      gap = std::max(gap, term);
    }
  }
  return gap;
}

void BaselineConfig::validate() const {
  if (!(eps_budget > 0.0)) {
    throw std::invalid_argument("BaselineConfig: eps_budget must be positive");
  }
  if (query_budget == 0) {
    throw std::invalid_argument("BaselineConfig: query_budget must be positive");
  }
  if (!(subsample_q > 0.0 && subsample_q <= 1.0)) {
    throw std::invalid_argument("BaselineConfig: subsample_q must be in (0, 1]");
  }
}

PrivacyLedger::PrivacyLedger(RenyiOrder alpha, double delta)
    : alpha_(alpha), delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("PrivacyLedger: delta must be in (0, 1)");
  }
}

void PrivacyLedger::record(const QueryOutcome& outcome) {
  if (outcome.alpha != alpha_.value()) {
    throw std::invalid_argument(
        "PrivacyLedger::record: outcome order " + std::to_string(outcome.alpha) +
        " does not match ledger order " + std::to_string(alpha_.value()));
  }
  if (outcome.screened_out && outcome.eps_decode != 0.0) {
    throw std::invalid_argument(
        "PrivacyLedger::record: screened-out query cannot carry a decode loss");
  }
  LedgerEntry entry;
  entry.query_index = entries_.size();
  entry.eps_screen = outcome.eps_screen;
  entry.eps_decode = outcome.eps_decode;
  entry.screened_out = outcome.screened_out;
  entry.eps_decode_clamped = outcome.eps_decode_clamped;
  entries_.push_back(entry);
  eps_rdp_total_ += outcome.eps_screen + outcome.eps_decode;
}

double PrivacyLedger::eps_dp_total() const {
  return rdp_to_dp(eps_rdp_total_, alpha_, delta_);
}

}  // namespace dpmix
