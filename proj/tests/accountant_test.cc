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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"

#include "dpmix/decoder.h"
#include "dpmix/projection.h"
#include "test_util.h"

namespace dpmix {
namespace {

using dpmix_test::naive_renyi_sym;
using dpmix_test::random_dist;

// Frozen from 50-digit evaluations of the defining formulas.
constexpr double kLeaveOneOutTwoMembers = 0.04082199452025511;
constexpr double kBoundAlpha6Beta001N100 = 0.004587222799637845;
constexpr double kSubsampledHalf = 0.025953017476955517;
constexpr double kConversionOverheadAlpha18 = 0.45005062775264337;
constexpr double kConversionAlpha2Delta01Eps1 = 1.9162907318741551;
constexpr double kBetaFor8Over1024 = 0.013384515944303633;

QueryOutcome make_outcome(double alpha, double eps_screen, double eps_decode,
                          bool screened_out) {
  return QueryOutcome{.token = 0,
                      .screened_out = screened_out,
                      .eps_screen = eps_screen,
                      .eps_decode = eps_decode,
                      .lambdas = {},
                      .output_dist_digest = 0,
                      .output_dist = ProbDist({1.0}),
                      .alpha = alpha};
}

TEST(DataDependentLoss, IdenticalMembersCostNothing) {
  Rng rng(3);
  const ProbDist member = random_dist(rng, 8);
  const ProbDist p_public = random_dist(rng, 8);
  const std::vector<ProbDist> ensemble(6, member);
  EXPECT_EQ(data_dependent_loss(ensemble, p_public, RenyiOrder(18.0)), 0.0);
}

TEST(DataDependentLoss, MatchesLeaveOneOutBruteForce) {
  const std::vector<ProbDist> ensemble = {ProbDist({0.6, 0.4}), ProbDist({0.4, 0.6})};
  const ProbDist p_public({0.5, 0.5});
  const double got = data_dependent_loss(ensemble, p_public, RenyiOrder(2.0));
  EXPECT_NEAR(got, kLeaveOneOutTwoMembers, 1e-12);

  // Independent brute force on random ensembles.
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.next_below(7);
    const std::size_t v = 2 + rng.next_below(11);
    std::vector<ProbDist> members;
    for (std::size_t i = 0; i < n; ++i) members.push_back(random_dist(rng, v));
    const double alpha = 1.5 + 10.0 * rng.uniform();

    std::vector<double> mean(v, 0.0);
    for (const ProbDist& p : members) {
      for (std::size_t x = 0; x < v; ++x) mean[x] += p[x] / static_cast<double>(n);
    }
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> loo(v, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        for (std::size_t x = 0; x < v; ++x) {
          loo[x] += members[j][x] / static_cast<double>(n - 1);
        }
      }
      expected = std::max(expected, naive_renyi_sym(mean, loo, alpha));
    }
    const double got_random =
        data_dependent_loss(members, random_dist(rng, v), RenyiOrder(alpha));
    EXPECT_NEAR(got_random, expected, 1e-9);
  }
}

TEST(DataDependentLoss, SingleMemberComparesAgainstPublic) {
  const ProbDist member({0.6, 0.4});
  const ProbDist p_public({0.5, 0.5});
  const std::vector<ProbDist> ensemble = {member};
  const double got = data_dependent_loss(ensemble, p_public, RenyiOrder(2.0));
  EXPECT_NEAR(got, naive_renyi_sym(member.values(), p_public.values(), 2.0), 1e-12);
  EXPECT_THROW(data_dependent_loss({}, p_public, RenyiOrder(2.0)),
               std::invalid_argument);
}

TEST(DataIndependentBound, MatchesClosedForm) {
  EXPECT_EQ(data_independent_bound(RenyiOrder(6.0), 0.0, 100), 0.0);
  EXPECT_NEAR(data_independent_bound(RenyiOrder(6.0), 0.01, 100),
              kBoundAlpha6Beta001N100, 1e-15);
  EXPECT_NEAR(data_independent_bound(RenyiOrder(6.0), 0.01, 1), 0.06, 1e-15);
}

TEST(DataIndependentBound, SurvivesLargeExponents) {
  // 4 * beta * alpha * (alpha - 1) = 456 would overflow a double exp().
  const double got = data_independent_bound(RenyiOrder(20.0), 0.3, 16);
  EXPECT_TRUE(std::isfinite(got));
  const long double exponent = 4.0L * 0.3L * 20.0L * 19.0L;
  const long double direct =
      std::log((15.0L + std::exp(exponent)) / 16.0L) / 19.0L;
  EXPECT_NEAR(got, static_cast<double>(direct), 1e-9 * static_cast<double>(direct));
}

// The data-dependent loss of any ensemble projected to radius beta*alpha
// never exceeds the closed-form bound.
TEST(DataIndependentBound, DominatesDataDependentLoss) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.next_below(15);
    const std::size_t v = 2 + rng.next_below(31);
    const double beta = 0.01 + 0.29 * rng.uniform();
    const double alpha = 2.0 + 18.0 * rng.uniform();
    const ProbDist p_public = random_dist(rng, v);
    std::vector<ProbDist> projected;
    for (std::size_t i = 0; i < n; ++i) {
      projected.push_back(
          project(random_dist(rng, v), p_public, RenyiOrder(alpha), beta).projected);
    }
    const double loss = data_dependent_loss(projected, p_public, RenyiOrder(alpha));
    const double bound = data_independent_bound(RenyiOrder(alpha), beta, n);
    EXPECT_LE(loss, bound + 1e-9) << "n=" << n << " v=" << v << " beta=" << beta
                                  << " alpha=" << alpha;
  }
}

TEST(SubsampledLoss, CollapsesExactlyAtTheEndpoints) {
  const auto table = [](int k) { return 0.01 * k; };
  EXPECT_EQ(subsampled_loss(table, 0.0, 7), 0.0);
  EXPECT_EQ(subsampled_loss(table, 1.0, 7), table(7));
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int alpha = 2 + static_cast<int>(rng.next_below(30));
    const double scale = rng.uniform();
    const auto random_table = [scale](int k) { return scale * std::sqrt(k); };
    EXPECT_EQ(subsampled_loss(random_table, 1.0, alpha), random_table(alpha));
    EXPECT_EQ(subsampled_loss(random_table, 0.0, alpha), 0.0);
  }
}

TEST(SubsampledLoss, MatchesHandExpansion) {
  const auto table = [](int) { return 0.1; };
  EXPECT_NEAR(subsampled_loss(table, 0.5, 2), kSubsampledHalf, 1e-15);
}

TEST(SubsampledLoss, AmplificationNeverHurtsOnMonotoneTables) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int alpha = 2 + static_cast<int>(rng.next_below(20));
    const double base = 0.01 + rng.uniform();
    const auto table = [base](int k) { return base * k; };  // increasing in k
    const double q = rng.uniform();
    EXPECT_LE(subsampled_loss(table, q, alpha), table(alpha) + 1e-12);
  }
}

TEST(SubsampledLoss, RejectsBadArguments) {
  const auto table = [](int) { return 0.1; };
  EXPECT_THROW(subsampled_loss(table, 0.5, 1), std::invalid_argument);
  EXPECT_THROW(subsampled_loss(table, -0.1, 4), std::invalid_argument);
  EXPECT_THROW(subsampled_loss(table, 1.5, 4), std::invalid_argument);
}

TEST(RdpToDp, MatchesClosedForm) {
  EXPECT_NEAR(rdp_to_dp(0.0, RenyiOrder(18.0), 1e-5), kConversionOverheadAlpha18, 1e-12);
  EXPECT_NEAR(rdp_to_dp(1.0, RenyiOrder(2.0), 0.1), kConversionAlpha2Delta01Eps1, 1e-12);
  EXPECT_THROW(rdp_to_dp(1.0, RenyiOrder(2.0), 0.0), std::invalid_argument);
  EXPECT_THROW(rdp_to_dp(1.0, RenyiOrder(2.0), 1.0), std::invalid_argument);
  EXPECT_THROW(rdp_to_dp(-1.0, RenyiOrder(2.0), 0.1), std::invalid_argument);
}

TEST(RdpToDp, MonotoneInLossAndDelta) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const RenyiOrder alpha(1.5 + 20.0 * rng.uniform());
    const double eps = rng.uniform() * 5.0;
    const double delta = 1e-8 + 0.5 * rng.uniform();
    EXPECT_LT(rdp_to_dp(eps, alpha, delta), rdp_to_dp(eps + 0.1, alpha, delta));
    EXPECT_GT(rdp_to_dp(eps, alpha, delta), rdp_to_dp(eps, alpha, delta * 1.5));
  }
}

TEST(SelectBeta, MatchesClosedFormAndRoundTrips) {
  EXPECT_NEAR(select_beta(8.0, 1024, RenyiOrder(6.0), 100), kBetaFor8Over1024, 1e-15);
  // n = 1 branch.
  EXPECT_NEAR(select_beta(8.0, 1024, RenyiOrder(6.0), 1), 8.0 / (1024.0 * 6.0), 1e-18);

  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const double eps_budget = 0.1 + 20.0 * rng.uniform();
    const std::size_t query_budget = 1 + rng.next_below(4096);
    const RenyiOrder alpha(1.5 + 28.0 * rng.uniform());
    const std::size_t n = 1 + rng.next_below(200);
    const double beta = select_beta(eps_budget, query_budget, alpha, n);
    const double bound = data_independent_bound(alpha, beta, n);
    EXPECT_LE(bound, eps_budget / static_cast<double>(query_budget) + 1e-9)
        << "eps=" << eps_budget << " T=" << query_budget << " alpha=" << alpha.value()
        << " n=" << n;
  }
}

TEST(UtilityGapBound, MatchesClosedForm) {
  EXPECT_NEAR(utility_gap_bound({{0.5}}, {{0.8}}, {0.2}), 0.5 * std::log(4.0), 1e-15);
  // Full mixing weight everywhere: no penalty.
  EXPECT_EQ(utility_gap_bound({{1.0, 1.0}}, {{0.8, 0.3}}, {0.2, 0.6}), 0.0);
  // Identical likelihoods: log-ratio is zero.
  EXPECT_EQ(utility_gap_bound({{0.2, 0.7}}, {{0.4, 0.5}}, {0.4, 0.5}), 0.0);
  EXPECT_THROW(utility_gap_bound({{0.5}}, {{0.8}}, {0.0}), std::invalid_argument);
  EXPECT_THROW(utility_gap_bound({{0.5}}, {{0.8, 0.2}}, {0.1}), std::invalid_argument);
}

TEST(PrivacyLedger, CompositionIsAdditive) {
  PrivacyLedger ledger(RenyiOrder(18.0), 1e-5);
  // Dyadic per-query losses compose without rounding, so the total is exact.
  const double eps0 = 0.125;
  for (int i = 0; i < 1000; ++i) {
    ledger.record(make_outcome(18.0, 0.0, eps0, false));
  }
  EXPECT_EQ(ledger.eps_rdp_total(), 1000 * eps0);
  EXPECT_EQ(ledger.entries().size(), 1000u);
  EXPECT_EQ(ledger.entries().back().query_index, 999u);

  double replayed = 0.0;
  for (const LedgerEntry& e : ledger.entries()) {
    replayed += e.eps_screen + e.eps_decode;
  }
  EXPECT_EQ(replayed, ledger.eps_rdp_total());
}

TEST(PrivacyLedger, ScreenedOutEntriesChargeScreeningOnly) {
  PrivacyLedger ledger(RenyiOrder(18.0), 1e-5);
  ledger.record(make_outcome(18.0, 1.8e-7, 0.0, true));
  EXPECT_EQ(ledger.eps_rdp_total(), 1.8e-7);
  EXPECT_THROW(ledger.record(make_outcome(18.0, 1.8e-7, 0.5, true)),
               std::invalid_argument);
}

TEST(PrivacyLedger, RejectsOrderMismatchAndBadDelta) {
  PrivacyLedger ledger(RenyiOrder(18.0), 1e-5);
  EXPECT_THROW(ledger.record(make_outcome(6.0, 0.0, 0.1, false)),
               std::invalid_argument);
  EXPECT_THROW(PrivacyLedger(RenyiOrder(18.0), 0.0), std::invalid_argument);
  EXPECT_THROW(PrivacyLedger(RenyiOrder(18.0), 1.0), std::invalid_argument);
}

// The published breakdown: decode losses totaling 0.472 plus screening
// losses totaling 0.002 at order 18, delta 1e-5, convert to 0.924 DP.
TEST(PrivacyLedger, ReproducesPublishedBreakdown) {
  PrivacyLedger ledger(RenyiOrder(18.0), 1e-5);
  ledger.record(make_outcome(18.0, 0.002, 0.0, true));
  ledger.record(make_outcome(18.0, 0.0, 0.472, false));
  EXPECT_NEAR(ledger.eps_rdp_total(), 0.474, 1e-12);
  EXPECT_NEAR(ledger.eps_dp_total(), 0.924, 1e-3);
}

}  // namespace
}  // namespace dpmix
