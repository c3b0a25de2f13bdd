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

#ifndef STEGLAB_NN_HPP
#define STEGLAB_NN_HPP

#include <vector>

#include "steglab/tensor.hpp"

namespace steglab {

// Weight layout convention: a kernel tensor w has dims (a, b, kh, kw).
// conv2d maps b input channels to a output channels; tconv2d with the same
// tensor maps a channels to b. The two ops are exact adjoints:
//   <conv2d(x; w), y> == <x, tconv2d(y; w)>   (zero bias, same stride/pad)
// which is what makes tconv the gradient of conv and vice versa.

/// Cross-correlation with zero padding. x (n,b,h,w), w (a,b,kh,kw),
/// bias (a,1,1,1) or empty. Output (n,a,oh,ow), oh = (h+2p-kh)/s + 1.
Tensor4 conv2d(const Tensor4& x, const Tensor4& w, const Tensor4& bias,
               int stride, int pad);

/// Gradients of conv2d. dw/db are accumulated into (caller zeroes them);
/// pass nullptr to skip. Returns dx when need_dx, else an empty tensor.
Tensor4 conv2d_backward(const Tensor4& x, const Tensor4& w, const Tensor4& dy,
                        int stride, int pad, Tensor4* dw, Tensor4* db,
                        bool need_dx);

/// Transposed convolution (fractionally strided). x (n,a,h,w), w (a,b,kh,kw),
/// bias (b,1,1,1). Output (n,b,H,W), H = (h-1)*s - 2p + kh.
Tensor4 tconv2d(const Tensor4& x, const Tensor4& w, const Tensor4& bias,
                int stride, int pad);

Tensor4 tconv2d_backward(const Tensor4& x, const Tensor4& w, const Tensor4& dy,
                         int stride, int pad, Tensor4* dw, Tensor4* db,
                         bool need_dx);

enum class BnMode { train, eval };

struct BnCache {
  Tensor4 xhat;
  std::vector<double> inv_std;  // per channel
  BnMode mode = BnMode::train;
};

/// Per-channel batch normalization with biased batch variance.
/// In train mode statistics come from the batch; running_mean/var are updated
/// (exponential, `momentum`) only when update_running is set, so a frozen
/// player can be evaluated under batch statistics without mutating its state.
/// In eval mode the running statistics are used and never touched.
Tensor4 batchnorm(const Tensor4& x, const Tensor4& gamma, const Tensor4& beta,
                  Tensor4& running_mean, Tensor4& running_var, BnMode mode,
                  bool update_running, double eps, double momentum,
                  BnCache* cache);

Tensor4 batchnorm_backward(const BnCache& cache, const Tensor4& gamma,
                           const Tensor4& dy, Tensor4* dgamma, Tensor4* dbeta);

enum class Act { leaky_relu, tanh_out, sigmoid, gaussian };

/// Elementwise activation. `slope` is the negative-side slope of leaky_relu
/// and is ignored by the others. gaussian is f(x) = exp(-x^2).
Tensor4 activation(Act kind, const Tensor4& x, double slope = 0.2);

/// dx given both forward input and output (each kind uses the cheaper one).
Tensor4 activation_backward(Act kind, const Tensor4& x, const Tensor4& y,
                            const Tensor4& dy, double slope = 0.2);

/// Non-overlapping average pooling when stride == k; no padding.
Tensor4 pool_avg(const Tensor4& x, int k, int stride);
Tensor4 pool_avg_backward(int k, int stride, int in_h, int in_w,
                          const Tensor4& dy);

/// y = x * w^T + b. x (n,in,1,1), w (out,in,1,1), b (out,1,1,1) or empty.
Tensor4 fully_connected(const Tensor4& x, const Tensor4& w, const Tensor4& b);
Tensor4 fully_connected_backward(const Tensor4& x, const Tensor4& w,
                                 const Tensor4& dy, Tensor4* dw, Tensor4* db,
                                 bool need_dx);

/// Softmax over the channel axis (used with c == 2 heads).
Tensor4 softmax(const Tensor4& x);
Tensor4 softmax_backward(const Tensor4& y, const Tensor4& dy);

/// Mean binary cross-entropy over a batch of scalar probabilities.
/// Probabilities are clamped to [eps, 1-eps] before the logs.
double bce_loss(const std::vector<double>& p, const std::vector<double>& label,
                double eps = 1e-7);
std::vector<double> bce_loss_backward(const std::vector<double>& p,
                                      const std::vector<double>& label,
                                      double eps = 1e-7);

/// Mean of log(p) with the same clamp; gradient helper for the game losses.
double mean_log(const std::vector<double>& p, double eps = 1e-7);
std::vector<double> mean_log_backward(const std::vector<double>& p,
                                      double eps = 1e-7);

/// Set the BLAS thread count (reads STEGLAB_THREADS in the CLI). A count of
/// one keeps every run on a single core and bitwise reproducible.
void set_blas_threads(int n);

}  // namespace steglab

#endif
