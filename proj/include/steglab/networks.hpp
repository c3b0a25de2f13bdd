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

#ifndef STEGLAB_NETWORKS_HPP
#define STEGLAB_NETWORKS_HPP

#include <array>
#include <cstdint>

#include "steglab/nn.hpp"
#include "steglab/params.hpp"
#include "steglab/rng.hpp"
#include "steglab/tensor.hpp"

namespace steglab {

// Generator: FC projects z to (base,4,4); four up-sampling stages, each a
// stride-2 transposed conv (kernel 4, pad 1) with batchnorm and leaky-ReLU,
// halving channels (base -> base/2 -> base/4 -> base/8 -> img_channels);
// a final tanh maps into (-1,1). img_size must be 16 * 2^... = 64 here.
struct GenArch {
  int z_dim = 100;
  int base = 512;
  int img_channels = 3;
  int img_size = 64;
};

// Discriminator: four stride-2 convs (kernel 4, pad 1), widths base,
// 2*base, 4*base, 8*base; batchnorm on all but the first stage; leaky-ReLU;
// FC to one scalar. sigmoid_head selects probability vs. linear critic.
struct DiscArch {
  int base = 64;
  int img_channels = 3;
  int img_size = 64;
  bool sigmoid_head = true;
};

enum class DetNonlin { leaky_relu, gaussian };

// Steganalyser: fixed high-pass filter to one residual plane, then four
// conv stages (kernel 5, stride 1, pad 2) each followed by the non-linearity
// and 2x2 average pooling, then FC fc_hidden and FC 2 with softmax.
struct DetArch {
  std::array<int, 4> widths{16, 32, 64, 128};
  int fc_hidden = 256;
  DetNonlin nonlin = DetNonlin::leaky_relu;
  int img_channels = 3;
  int img_size = 64;
};

constexpr double kLeakySlope = 0.2;

/// The fixed 5x5 high-pass kernel, row major. Rows sum to zero; center -12.
extern const std::array<double, 25> kHpfKernel;

/// Kernel tensor (1, img_channels, 5, 5): the same plane per input channel,
/// so channels are summed into a single residual.
Tensor4 hpf_kernel(int img_channels);

/// Residual of x under the fixed kernel, stride 1 pad 2 -> (n,1,h,w).
Tensor4 hpf_residual(const Tensor4& x);

/// Weight init: conv and FC weights N(0, 0.02), biases zero, batchnorm
/// gamma N(1, 0.02), beta zero, running statistics (0, 1).
void build_generator(const GenArch& a, ParamStore& p, Rng& rng);
void build_discriminator(const DiscArch& a, ParamStore& p, Rng& rng);
void build_steganalyser(const DetArch& a, ParamStore& p, Rng& rng);

/// Uniform[-1,1] noise batch shaped (n, z_dim, 1, 1).
Tensor4 sample_noise(int n, int z_dim, Rng& rng);

struct GenCache {
  Tensor4 z;
  Tensor4 fc_out;
  std::array<Tensor4, 4> stage_in;
  std::array<Tensor4, 4> tconv_out;
  std::array<BnCache, 4> bn;
  std::array<Tensor4, 4> bn_out;
  std::array<Tensor4, 4> act_out;
  Tensor4 y;  // tanh output, clamped into the open interval
};

/// Forward G. In train mode batch statistics are used; running statistics
/// update only when update_running is set (the owning player's own step).
Tensor4 forward_g(const GenArch& a, ParamStore& p, const Tensor4& z,
                  BnMode mode, bool update_running, GenCache* cache);

/// Accumulates parameter gradients from dy (same shape as the output).
void backward_g(const GenArch& a, ParamStore& p, const GenCache& cache,
                const Tensor4& dy);

struct DiscCache {
  Tensor4 x;
  std::array<Tensor4, 4> conv_out;
  std::array<BnCache, 3> bn;  // stages 2..4
  std::array<Tensor4, 4> bn_out;
  std::array<Tensor4, 4> act_out;
  Tensor4 fc_out;
  Tensor4 score;  // sigmoid probability or raw critic value
  bool sigmoid = true;
};

/// Scores shaped (n,1,1,1): probabilities in sigmoid mode, reals in critic.
Tensor4 forward_d(const DiscArch& a, ParamStore& p, const Tensor4& x,
                  BnMode mode, bool update_running, DiscCache* cache);

/// dscore is the loss gradient w.r.t. the returned scores. Accumulates into
/// the parameter gradients only when param_grads is set (a frozen player
/// skips that work); returns dx when need_dx (the path the generator trains
/// through), else an empty tensor.
Tensor4 backward_d(const DiscArch& a, ParamStore& p, const DiscCache& cache,
                   const Tensor4& dscore, bool param_grads, bool need_dx);

struct DetCache {
  Tensor4 x;
  Tensor4 residual;
  std::array<Tensor4, 4> conv_out;
  std::array<Tensor4, 4> act_out;
  std::array<Tensor4, 4> pool_out;
  Tensor4 fc1_out;
  Tensor4 fc1_act;
  Tensor4 logits;
  Tensor4 probs;  // (n,2,1,1); channel 1 is the stego class
};

/// Softmax class probabilities (n,2,1,1); channel 1 is "stego".
Tensor4 forward_s(const DetArch& a, ParamStore& p, const Tensor4& x,
                  DetCache* cache);

/// dprobs is the gradient w.r.t. the softmax output. The frozen filter
/// receives no gradient in any mode. Accumulates parameter gradients only
/// when param_grads is set; returns dx when need_dx.
Tensor4 backward_s(const DetArch& a, ParamStore& p, const DetCache& cache,
                   const Tensor4& dprobs, bool param_grads, bool need_dx);

/// Clamp every trainable parameter into [-c, c] (WGAN critic constraint).
void clip_weights(ParamStore& p, double c);

/// Hash of the frozen filter bytes inside a steganalyser store.
uint64_t hpf_hash(const ParamStore& p);

}  // namespace steglab

#endif
