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

#include "dpmix/prob_dist.h"

namespace dpmix {

inline constexpr double kDefaultProjectionTolerance = 1e-6;
inline constexpr int kMaxBisectionIterations = 64;

struct ProjectionResult {
  // Mixing weight of the private distribution, in [0, 1].
  double lambda;
  // lambda * p_private + (1 - lambda) * p_public.
  ProbDist projected;
  // Symmetric Rényi divergence of `projected` from the public distribution.
  double achieved_divergence;
};

// Largest lambda in [0, 1] (within tol) whose mixture
// lambda * p_private + (1 - lambda) * p_public stays inside the symmetric
// Rényi ball of radius beta * alpha around p_public.
//
// The constraint function f(lambda) is non-decreasing with f(0) = 0, so a
// plain bisection finds the boundary; the returned lambda is always
// feasible (achieved_divergence <= beta * alpha + tol) and maximal up to
// tol. A private distribution carrying mass outside the public support has
// infinite divergence for every lambda > 0 and projects to lambda = 0.
//
// Throws std::invalid_argument for mismatched vocabularies, beta < 0, or
// tol <= 0.
ProjectionResult project(const ProbDist& p_private, const ProbDist& p_public,
                         RenyiOrder alpha, double beta,
                         double tol = kDefaultProjectionTolerance);

}  // namespace dpmix
