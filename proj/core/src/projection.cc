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

#include "dpmix/projection.h"

#include <cmath>
#include <stdexcept>

#include "dpmix/divergence.h"

namespace dpmix {

ProjectionResult project(const ProbDist& p_private, const ProbDist& p_public,
                         RenyiOrder alpha, double beta, double tol) {
  if (p_private.size() != p_public.size()) {
    throw std::invalid_argument("project: dimension mismatch");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("project: beta must be finite and >= 0");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("project: tol must be positive");
  }
  const double radius = beta * alpha.value();

  const auto divergence_at = [&](double lambda) {
    return renyi_divergence_sym(ProbDist::mix(lambda, p_private, p_public),
                                p_public, alpha);
  };

  // Right endpoint first: when the private distribution is already inside the
  // ball, no mixing is needed.
  const double at_one = renyi_divergence_sym(p_private, p_public, alpha);
  if (at_one <= radius) {
    return {1.0, p_private, at_one};
  }

  // Disjoint-support case: any positive mixing weight has infinite
  // divergence, so only the public distribution itself is feasible.
  if (std::isinf(divergence_at(tol))) {
    return {0.0, p_public, 0.0};
  }

  double lo = 0.0;  // feasible: f(0) = 0 <= radius
  double hi = 1.0;  // infeasible, checked above
  for (int i = 0; i < kMaxBisectionIterations && (hi - lo) > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (divergence_at(mid) <= radius) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  ProbDist projected = ProbDist::mix(lo, p_private, p_public);
  const double achieved = renyi_divergence_sym(projected, p_public, alpha);
  return {lo, std::move(projected), achieved};
}

}  // namespace dpmix
