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

#include "dpmix/divergence.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dpmix/numeric.h"

namespace dpmix {

double renyi_divergence(const ProbDist& p, const ProbDist& q, RenyiOrder alpha) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("renyi_divergence: dimension mismatch");
  }
  // Identical inputs have divergence 0 by definition; short-circuiting keeps
  // the identity exact instead of within rounding of the log-domain sum.
  if (std::equal(p.values().begin(), p.values().end(), q.values().begin())) {
    return 0.0;
  }
  const double a = alpha.value();
  std::vector<double> log_terms;
  log_terms.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double px = p[i];
    if (px == 0.0) continue;  // 0 * log(0/0) terms contribute nothing
    const double qx = q[i];
    if (qx == 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    log_terms.push_back(a * std::log(px) + (1.0 - a) * std::log(qx));
  }
  const double lse = logsumexp(log_terms);
  return std::max(0.0, lse / (a - 1.0));
}

double renyi_divergence_sym(const ProbDist& p, const ProbDist& q, RenyiOrder alpha) {
  return std::max(renyi_divergence(p, q, alpha), renyi_divergence(q, p, alpha));
}

CappedValue cap_divergence(double divergence, double cap) {
  if (std::isinf(divergence)) {
    return {cap, true};
  }
  return {divergence, false};
}

}  // namespace dpmix
