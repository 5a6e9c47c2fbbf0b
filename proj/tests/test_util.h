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

// Independent reference computations the tests check the library against.
// Everything here deliberately avoids the library's log-domain and bisection
// code paths: divergences are direct extended-precision summation and the
// projection oracle is an exhaustive grid scan.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "dpmix/prob_dist.h"
#include "dpmix/random.h"

namespace dpmix_test {

// Direct summation of sum_x p(x)^a q(x)^(1-a) in long double.
inline double naive_renyi(std::span<const double> p, std::span<const double> q,
                          double alpha) {
  long double sum = 0.0L;
  const long double a = alpha;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    sum += std::pow(static_cast<long double>(p[i]), a) *
           std::pow(static_cast<long double>(q[i]), 1.0L - a);
  }
  return static_cast<double>(std::log(sum) / (a - 1.0L));
}

inline double naive_renyi_sym(std::span<const double> p, std::span<const double> q,
                              double alpha) {
  return std::max(naive_renyi(p, q, alpha), naive_renyi(q, p, alpha));
}

// Largest lambda on the 1e-6 grid over [0, 1] whose mixture stays within
// radius. A coarse 1e-3 scan brackets the boundary, then a full-resolution
// scan walks the bracketing cell; the constraint is non-decreasing in
// lambda, so the two-stage scan visits the same maximum as the full grid.
inline double grid_project_lambda(const dpmix::ProbDist& p_private,
                                  const dpmix::ProbDist& p_public, double alpha,
                                  double radius, double resolution = 1e-6) {
  const auto feasible = [&](double lambda) {
    std::vector<double> mixed(p_private.size());
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      mixed[i] = lambda * p_private[i] + (1.0 - lambda) * p_public[i];
    }
    return naive_renyi_sym(mixed, p_public.values(), alpha) <= radius;
  };
  if (feasible(1.0)) return 1.0;
  const double coarse = 1e-3;
  double bracket = 0.0;
  for (double lambda = coarse; lambda < 1.0; lambda += coarse) {
    if (!feasible(lambda)) break;
    bracket = lambda;
  }
  double best = bracket;
  for (double lambda = bracket + resolution; lambda <= bracket + coarse + resolution;
       lambda += resolution) {
    if (lambda > 1.0 || !feasible(lambda)) break;
    best = lambda;
  }
  return best;
}

// Positive random distribution; the floor keeps entries bounded away from
// zero so divergences stay finite and moderate.
inline dpmix::ProbDist random_dist(dpmix::Rng& rng, std::size_t n,
                                   double floor = 1e-4) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - rng.uniform()) + floor;
    sum += x;
  }
  for (double& x : v) x /= sum;
  return dpmix::ProbDist(std::move(v));
}

}  // namespace dpmix_test
