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

#include <span>

namespace dpmix {

// log(sum_i exp(values[i])) evaluated stably. -inf entries are ignored;
// an empty span or all -inf yields -inf.
double logsumexp(std::span<const double> values);

// log of the binomial coefficient C(n, k) via lgamma. Requires 0 <= k <= n.
double log_binomial(int n, int k);

}  // namespace dpmix
