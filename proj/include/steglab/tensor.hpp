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

#ifndef STEGLAB_TENSOR_HPP
#define STEGLAB_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "steglab/errors.hpp"

namespace steglab {

/// Dense NCHW tensor of doubles. Activations, weights and gradients all use
/// this one carrier; a matrix is a Tensor4 with h = w = 1.
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, 0.0) {}

  size_t size() const { return v.size(); }
  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  double& at(int in, int ic, int ih, int iw) {
    return v[((static_cast<size_t>(in) * c + ic) * h + ih) * w + iw];
  }
  double at(int in, int ic, int ih, int iw) const {
    return v[((static_cast<size_t>(in) * c + ic) * h + ih) * w + iw];
  }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }
  void zero() { fill(0.0); }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  std::string shape_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

/// Batch of images in [-1, 1], channels first.
using ImageTensor = Tensor4;

inline void require_shape(const Tensor4& t, int n, int c, int h, int w,
                          const char* what) {
  if (t.n != n || t.c != c || t.h != h || t.w != w)
    throw usage_error(std::string(what) + ": expected shape (" +
                      std::to_string(n) + "," + std::to_string(c) + "," +
                      std::to_string(h) + "," + std::to_string(w) + "), got " +
                      t.shape_str());
}

}  // namespace steglab

#endif
