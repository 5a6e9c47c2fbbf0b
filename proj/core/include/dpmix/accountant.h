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
#include <functional>
#include <span>
#include <vector>

#include "dpmix/prob_dist.h"

namespace dpmix {

struct QueryOutcome;

// Data-dependent per-query loss of the private decoding step: with
// p = mean of the N projected member distributions and p_{-i} the mean with
// member i removed,
//
//   eps(D) = max_i  D_alpha_sym(p || p_{-i}).
//
// For N = 1 the neighboring output is the public distribution itself.
// Throws on an empty ensemble.
double data_dependent_loss(std::span<const ProbDist> projected,
                           const ProbDist& p_public, RenyiOrder alpha);

// Data-independent per-query bound for an ensemble of n members projected to
// radius beta * alpha:
//
//   n > 1:  log( (n - 1 + exp(4 beta alpha (alpha - 1))) / n ) / (alpha - 1)
//   n = 1:  beta * alpha
//
// Evaluated in the log domain, so large exponents do not overflow.
double data_independent_bound(RenyiOrder alpha, double beta, std::size_t n);

// Tight Poisson-subsampling amplification at integer order alpha >= 2 for a
// base mechanism whose loss at integer order k is base_eps(k):
//
//   (1/(alpha-1)) * log[ (1-q)^(alpha-1) (1 + (alpha-1) q)
//       + sum_{k=2}^{alpha} C(alpha,k) (1-q)^(alpha-k) q^k e^((k-1) base_eps(k)) ]
//
// q = 1 collapses to base_eps(alpha) and q = 0 to 0, both exactly.
// Throws for alpha < 2 or q outside [0, 1].
double subsampled_loss(const std::function<double(int)>& base_eps, double q,
                       int alpha);

// RDP -> approximate DP conversion:
//   eps_dp = eps_rdp + log((alpha-1)/alpha) - (log(delta) + log(alpha)) / (alpha-1)
// Requires delta in (0, 1).
double rdp_to_dp(double eps_rdp, RenyiOrder alpha, double delta);

// Largest per-query radius parameter beta such that the data-independent
// bound stays within eps_budget / query_budget:
//
//   n > 1:  log( n e^((alpha-1) eps_budget / query_budget) + 1 - n )
//             / (4 (alpha-1) alpha)
//   n = 1:  eps_budget / (query_budget * alpha)
double select_beta(double eps_budget, std::size_t query_budget,
                   RenyiOrder alpha, std::size_t n);

// Bound on the negative-log-likelihood gap between the realized mixture and
// the all-private ensemble:
//
//   max_{j,t} (1 - lambda[j][t]) * log(private_likelihoods[j][t] /
//                                      public_likelihoods[t])
//
// Matrices are indexed [model][query]. Likelihoods must be strictly
// positive. Returns 0 for empty inputs.
double utility_gap_bound(
    const std::vector<std::vector<double>>& lambdas,
    const std::vector<std::vector<double>>& private_likelihoods,
    const std::vector<double>& public_likelihoods);

// Fixed pre-query loss schedule of the non-adaptive baseline.
struct BaselineConfig {
  double eps_budget;          // total RDP budget eps_G
  std::size_t query_budget;   // number of queries the budget is split over
  double subsample_q;         // per-member Poisson participation probability

  void validate() const;  // throws std::invalid_argument naming the field
};

struct LedgerEntry {
  std::size_t query_index;
  double eps_screen;
  double eps_decode;
  bool screened_out;
  // True when an infinite decode loss was recorded as kDivergenceCap.
  bool eps_decode_clamped;
};

// Cumulative RDP loss at one fixed order, one entry per query. Additive
// composition: the total is always the ordered sum of the entries.
// Single-writer; concurrent readers see a consistent snapshot between calls.
class PrivacyLedger {
 public:
  PrivacyLedger(RenyiOrder alpha, double delta);

  // Appends the outcome and adds eps_screen + eps_decode to the total.
  // Throws if the outcome was produced at a different order, or if a
  // screened-out outcome carries a decode loss.
  void record(const QueryOutcome& outcome);

  RenyiOrder alpha() const { return alpha_; }
  double delta() const { return delta_; }
  double eps_rdp_total() const { return eps_rdp_total_; }
  // DP guarantee of the session so far, converted at the ledger's order.
  double eps_dp_total() const;
  const std::vector<LedgerEntry>& entries() const { return entries_; }

 private:
  RenyiOrder alpha_;
  double delta_;
  double eps_rdp_total_ = 0.0;
  std::vector<LedgerEntry> entries_;
};

}  // namespace dpmix
