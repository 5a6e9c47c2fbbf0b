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

// Default finite stand-in for an infinite divergence, in nats, for callers
// that cannot propagate +inf (e.g. serialized loss records).
inline constexpr double kDivergenceCap = 1e6;

struct CappedValue {
  double value;
  bool clamped;
};

// Rényi divergence of order alpha > 1 between p and q, in nats:
//
//   D_alpha(p || q) = log( sum_x p(x)^alpha * q(x)^(1-alpha) ) / (alpha - 1)
//
// Terms with p(x) = 0 contribute nothing. Returns +inf when p assigns
// positive mass where q assigns none. Evaluated in the log domain; never
// negative, and exactly 0 when p and q are entrywise identical.
// Throws std::invalid_argument on dimension mismatch.
double renyi_divergence(const ProbDist& p, const ProbDist& q, RenyiOrder alpha);

// max(D_alpha(p || q), D_alpha(q || p)).
double renyi_divergence_sym(const ProbDist& p, const ProbDist& q, RenyiOrder alpha);

// Clamps an infinite divergence to `cap` and reports whether clamping
// happened. Finite values pass through untouched.
CappedValue cap_divergence(double divergence, double cap = kDivergenceCap);

}  // namespace dpmix
