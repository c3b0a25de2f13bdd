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

#include "steglab/gradcheck.hpp"

#include <cmath>
#include <numeric>

#include "steglab/errors.hpp"

namespace steglab {

GradCheckResult grad_check(const std::function<double()>& loss,
                           std::vector<GradCheckTarget> targets, Rng& rng,
                           double eps, int coords) {
  if (!(eps > 0.0)) throw usage_error("grad_check eps must be positive");
  GradCheckResult res;
  for (const auto& t : targets) {
    if (!t.value || !t.analytic || !t.value->same_shape(*t.analytic))
      throw usage_error("grad_check target " + t.name + " malformed");
    const size_t n = t.value->size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    const size_t take = std::min<size_t>(n, static_cast<size_t>(coords));
    rng.shuffle_prefix(idx, take);
    for (size_t k = 0; k < take; ++k) {
      const size_t i = idx[k];
      double& v = t.value->v[i];
      const double saved = v;
      // Probe at three step sizes and keep the best agreement. A correct
      // gradient matches at some scale; a wrong one matches at none. This
      // keeps isolated kink crossings (leaky relu, clamps) from reading as
      // failures while a systematically wrong backward still trips.
      double rel = 0.0;
      for (int half = 0; half < 5; ++half) {
        const double h = eps / double(1 << half);
        v = saved + h;
        const long double fp = loss();
        v = saved - h;
        const long double fm = loss();
        v = saved;
        if (!std::isfinite(static_cast<double>(fp)) ||
            !std::isfinite(static_cast<double>(fm)))
          throw numeric_error("non-finite forward value while probing " +
                              t.name);
        const long double numeric =
            (fp - fm) / (2.0L * static_cast<long double>(h));
        const long double analytic = t.analytic->v[i];
        const long double denom = std::max<long double>(
            std::abs(analytic) + std::abs(numeric), 1e-3L);
        const double r =
            static_cast<double>(std::abs(analytic - numeric) / denom);
        if (half == 0 || r < rel) rel = r;
        if (rel < 1e-7) break;  // already at rounding noise, move on
      }
      ++res.n_checked;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst = t.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return res;
}

}  // namespace steglab
