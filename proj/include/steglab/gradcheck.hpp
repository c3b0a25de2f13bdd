/*
 * Copyright 2026 The steglab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STEGLAB_GRADCHECK_HPP
#define STEGLAB_GRADCHECK_HPP

#include <functional>
#include <string>
#include <vector>

#include "steglab/rng.hpp"
#include "steglab/tensor.hpp"

namespace steglab {

/// One tensor to probe: `value` is perturbed in place, `analytic` holds the
/// hand-written gradient to compare against.
struct GradCheckTarget {
  std::string name;
  Tensor4* value = nullptr;
  const Tensor4* analytic = nullptr;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;  // "tensor[index]" of the worst coordinate
  int n_checked = 0;
};

/// Central-difference verification of hand-written gradients.
///
/// `loss` re-evaluates the scalar forward map at the current parameter
/// values; `analytic` in each target must already hold d loss / d value.
/// A random subsample of at least `coords` coordinates per tensor (all of
/// them for small tensors) is probed without replacement. The difference
/// quotient and the error ratio are taken in long double, and the relative
/// error uses a floored denominator
///     rel = |a - n| / max(|a| + |n|, 1e-3)
/// so coordinates whose true gradient is ~0 (pure roundoff territory for
/// finite differences) cannot dominate the report.
GradCheckResult grad_check(const std::function<double()>& loss,
                           std::vector<GradCheckTarget> targets, Rng& rng,
                           double eps = 1e-5, int coords = 200);

}  // namespace steglab

#endif
