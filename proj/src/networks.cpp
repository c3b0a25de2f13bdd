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

#include "steglab/networks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "steglab/errors.hpp"

namespace steglab {

const std::array<double, 25> kHpfKernel = {
    -1, 2,  -2,  2,  -1,  //
    2,  -6, 8,   -6, 2,   //
    -2, 8,  -12, 8,  -2,  //
    2,  -6, 8,   -6, 2,   //
    -1, 2,  -2,  2,  -1,
};

Tensor4 hpf_kernel(int img_channels) {
  if (img_channels < 1) throw usage_error("hpf kernel needs >= 1 channel");
  Tensor4 w(1, img_channels, 5, 5);
  for (int c = 0; c < img_channels; ++c)
    for (int i = 0; i < 25; ++i) w.v[static_cast<size_t>(c) * 25 + i] = kHpfKernel[i];
  return w;
}

namespace {

// The frozen filter pads by edge replication rather than zeros, so every
// 5x5 window over a constant image sees that constant and the residual is
// exactly zero out to the border (each kernel row sums to zero).
Tensor4 replicate_pad2(const Tensor4& x) {
  Tensor4 out(x.n, x.c, x.h + 4, x.w + 4);
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c)
      for (int i = 0; i < x.h + 4; ++i) {
        const int si = std::clamp(i - 2, 0, x.h - 1);
        for (int j = 0; j < x.w + 4; ++j)
          out.at(n, c, i, j) = x.at(n, c, si, std::clamp(j - 2, 0, x.w - 1));
      }
  return out;
}

// Exact adjoint of replicate_pad2: border gradients fold back onto the
// clamped source pixels.
Tensor4 replicate_pad2_adjoint(const Tensor4& dpad, int h, int w) {
  Tensor4 dx(dpad.n, dpad.c, h, w);
  for (int n = 0; n < dpad.n; ++n)
    for (int c = 0; c < dpad.c; ++c)
      for (int i = 0; i < dpad.h; ++i) {
        const int si = std::clamp(i - 2, 0, h - 1);
        for (int j = 0; j < dpad.w; ++j)
          dx.at(n, c, si, std::clamp(j - 2, 0, w - 1)) += dpad.at(n, c, i, j);
      }
  return dx;
}

}  // namespace

Tensor4 hpf_residual(const Tensor4& x) {
  if (x.h < 5 || x.w < 5)
    throw usage_error("image smaller than the 5x5 filter");
  // Difference form around each window centre. The taps sum to zero, so
  // k[2][2]*xc equals minus the other taps times xc and every term can be
  // written k*(sample - centre). A constant window then contributes exact
  // zeros instead of accumulating product roundoff, for any constant.
  const Tensor4 xp = replicate_pad2(x);
  Tensor4 r(x.n, 1, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c)
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) {
          const double centre = xp.at(n, c, i + 2, j + 2);
          double acc = 0.0;
          for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) {
              if (a == 2 && b == 2) continue;
              acc += kHpfKernel[static_cast<size_t>(a) * 5 + b] *
                     (xp.at(n, c, i + a, j + b) - centre);
            }
          r.at(n, 0, i, j) += acc;
        }
  return r;
}

namespace {

Tensor4 randn(Rng& rng, int n, int c, int h, int w, double stddev,
              double mean = 0.0) {
  Tensor4 t(n, c, h, w);
  for (double& d : t.v) d = mean + stddev * rng.normal();
  return t;
}

void add_bn(ParamStore& p, const std::string& prefix, int c, Rng& rng) {
  p.add(prefix + ".gamma", randn(rng, c, 1, 1, 1, 0.02, 1.0));
  p.add(prefix + ".beta", Tensor4(c, 1, 1, 1));
  Tensor4 rv(c, 1, 1, 1);
  rv.fill(1.0);
  p.add(prefix + ".run_mean", Tensor4(c, 1, 1, 1), false, true);
  p.add(prefix + ".run_var", std::move(rv), false, true);
}

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

// Keep tanh strictly inside (-1,1); double tanh saturates to exactly 1.
constexpr double kOpenOne = 1.0 - 1e-12;

}  // namespace

void build_generator(const GenArch& a, ParamStore& p, Rng& rng) {
  if (a.z_dim < 1) throw usage_error("z_dim must be positive");
  if (a.base % 8 != 0 || a.base < 8)
    throw usage_error("generator base width must be a positive multiple of 8");
  if (a.img_size != 64) throw usage_error("image size is fixed at 64");
  const int chans[5] = {a.base, a.base / 2, a.base / 4, a.base / 8,
                        a.img_channels};
  p.add("fc.w", randn(rng, a.base * 16, a.z_dim, 1, 1, 0.02));
  p.add("fc.b", Tensor4(a.base * 16, 1, 1, 1));
  for (int i = 0; i < 4; ++i) {
    const std::string t = "tconv" + std::to_string(i + 1);
    p.add(t + ".w", randn(rng, chans[i], chans[i + 1], 4, 4, 0.02));
    p.add(t + ".b", Tensor4(chans[i + 1], 1, 1, 1));
    add_bn(p, "bn" + std::to_string(i + 1), chans[i + 1], rng);
  }
}

void build_discriminator(const DiscArch& a, ParamStore& p, Rng& rng) {
  if (a.base < 1) throw usage_error("discriminator base width must be >= 1");
  if (a.img_size != 64) throw usage_error("image size is fixed at 64");
  const int chans[5] = {a.img_channels, a.base, a.base * 2, a.base * 4,
                        a.base * 8};
  for (int i = 0; i < 4; ++i) {
    const std::string c = "conv" + std::to_string(i + 1);
    p.add(c + ".w", randn(rng, chans[i + 1], chans[i], 4, 4, 0.02));
    p.add(c + ".b", Tensor4(chans[i + 1], 1, 1, 1));
    if (i > 0) add_bn(p, "bn" + std::to_string(i + 1), chans[i + 1], rng);
  }
  p.add("fc.w", randn(rng, 1, a.base * 8 * 16, 1, 1, 0.02));
  p.add("fc.b", Tensor4(1, 1, 1, 1));
}

void build_steganalyser(const DetArch& a, ParamStore& p, Rng& rng) {
  if (a.img_size % 16 != 0 || a.img_size < 16)
    throw usage_error("steganalyser image size must be a multiple of 16");
  p.add("hpf.w", hpf_kernel(a.img_channels), false);
  int prev = 1;
  for (int i = 0; i < 4; ++i) {
    const std::string c = "conv" + std::to_string(i + 1);
    p.add(c + ".w", randn(rng, a.widths[i], prev, 5, 5, 0.02));
    p.add(c + ".b", Tensor4(a.widths[i], 1, 1, 1));
    prev = a.widths[i];
  }
  const int spatial = a.img_size / 16;
  p.add("fc1.w",
        randn(rng, a.fc_hidden, a.widths[3] * spatial * spatial, 1, 1, 0.02));
  p.add("fc1.b", Tensor4(a.fc_hidden, 1, 1, 1));
  p.add("fc2.w", randn(rng, 2, a.fc_hidden, 1, 1, 0.02));
  p.add("fc2.b", Tensor4(2, 1, 1, 1));
}

Tensor4 sample_noise(int n, int z_dim, Rng& rng) {
  if (n < 0 || z_dim < 1) throw usage_error("bad noise shape");
  Tensor4 z(n, z_dim, 1, 1);
  for (double& d : z.v) d = rng.uniform_sym();
  return z;
}

Tensor4 forward_g(const GenArch& a, ParamStore& p, const Tensor4& z,
                  BnMode mode, bool update_running, GenCache* cache) {
  if (z.c != a.z_dim || z.h != 1 || z.w != 1)
    throw usage_error("noise shape mismatch: got " + z.shape_str());
  GenCache local;
  GenCache& cc = cache ? *cache : local;
  cc.z = z;
  cc.fc_out = fully_connected(z, p.at("fc.w").value, p.at("fc.b").value);
  Tensor4 cur = cc.fc_out;
  cur.n = z.n;
  cur.c = a.base;
  cur.h = 4;
  cur.w = 4;  // reshape: same buffer, NCHW view
  for (int i = 0; i < 4; ++i) {
    const std::string t = "tconv" + std::to_string(i + 1);
    const std::string b = "bn" + std::to_string(i + 1);
    cc.stage_in[i] = std::move(cur);
    cc.tconv_out[i] = tconv2d(cc.stage_in[i], p.at(t + ".w").value,
                              p.at(t + ".b").value, 2, 1);
    cc.bn_out[i] = batchnorm(cc.tconv_out[i], p.at(b + ".gamma").value,
                             p.at(b + ".beta").value,
                             p.at(b + ".run_mean").value,
                             p.at(b + ".run_var").value, mode, update_running,
                             kBnEps, kBnMomentum, &cc.bn[i]);
    cc.act_out[i] = activation(Act::leaky_relu, cc.bn_out[i], kLeakySlope);
    cur = cc.act_out[i];
  }
  cc.y = activation(Act::tanh_out, cur);
  for (double& d : cc.y.v) {
    if (d > kOpenOne) d = kOpenOne;
    if (d < -kOpenOne) d = -kOpenOne;
  }
  if (cc.y.c != a.img_channels || cc.y.h != a.img_size ||
      cc.y.w != a.img_size)
    throw numeric_error("generator produced unexpected shape " +
                        cc.y.shape_str());
  return cc.y;
}

void backward_g(const GenArch& a, ParamStore& p, const GenCache& cache,
                const Tensor4& dy) {
  Tensor4 d = activation_backward(Act::tanh_out, cache.act_out[3], cache.y, dy);
  for (int i = 3; i >= 0; --i) {
    const std::string t = "tconv" + std::to_string(i + 1);
    const std::string b = "bn" + std::to_string(i + 1);
    d = activation_backward(Act::leaky_relu, cache.bn_out[i], cache.act_out[i],
                            d, kLeakySlope);
    d = batchnorm_backward(cache.bn[i], p.at(b + ".gamma").value, d,
                           &p.at(b + ".gamma").grad, &p.at(b + ".beta").grad);
    d = tconv2d_backward(cache.stage_in[i], p.at(t + ".w").value, d, 2, 1,
                         &p.at(t + ".w").grad, &p.at(t + ".b").grad, true);
  }
  d.c = a.base * 16;
  d.h = 1;
  d.w = 1;  // un-reshape to the FC view
  fully_connected_backward(cache.z, p.at("fc.w").value, d, &p.at("fc.w").grad,
                           &p.at("fc.b").grad, false);
}

Tensor4 forward_d(const DiscArch& a, ParamStore& p, const Tensor4& x,
                  BnMode mode, bool update_running, DiscCache* cache) {
  if (x.c != a.img_channels || x.h != a.img_size || x.w != a.img_size)
    throw usage_error("discriminator input shape mismatch: " + x.shape_str());
  DiscCache local;
  DiscCache& cc = cache ? *cache : local;
  cc.x = x;
  cc.sigmoid = a.sigmoid_head;
  Tensor4 cur = x;
  for (int i = 0; i < 4; ++i) {
    const std::string c = "conv" + std::to_string(i + 1);
    cc.conv_out[i] =
        conv2d(cur, p.at(c + ".w").value, p.at(c + ".b").value, 2, 1);
    if (i > 0) {
      const std::string b = "bn" + std::to_string(i + 1);
      cc.bn_out[i] = batchnorm(
          cc.conv_out[i], p.at(b + ".gamma").value, p.at(b + ".beta").value,
          p.at(b + ".run_mean").value, p.at(b + ".run_var").value, mode,
          update_running, kBnEps, kBnMomentum, &cc.bn[i - 1]);
    } else {
      cc.bn_out[i] = cc.conv_out[i];
    }
    cc.act_out[i] = activation(Act::leaky_relu, cc.bn_out[i], kLeakySlope);
    cur = cc.act_out[i];
  }
  Tensor4 flat = cur;
  flat.c = cur.c * cur.h * cur.w;
  flat.h = 1;
  flat.w = 1;
  cc.fc_out = fully_connected(flat, p.at("fc.w").value, p.at("fc.b").value);
  cc.score =
      a.sigmoid_head ? activation(Act::sigmoid, cc.fc_out) : cc.fc_out;
  return cc.score;
}

Tensor4 backward_d([[maybe_unused]] const DiscArch& a, ParamStore& p,
                   const DiscCache& cache, const Tensor4& dscore,
                   bool param_grads, bool need_dx) {
  Tensor4 d = cache.sigmoid
                  ? activation_backward(Act::sigmoid, cache.fc_out,
                                        cache.score, dscore)
                  : dscore;
  Tensor4 flat = cache.act_out[3];
  const int last_c = flat.c, last_h = flat.h, last_w = flat.w;
  flat.c = last_c * last_h * last_w;
  flat.h = 1;
  flat.w = 1;
  d = fully_connected_backward(flat, p.at("fc.w").value, d,
                               param_grads ? &p.at("fc.w").grad : nullptr,
                               param_grads ? &p.at("fc.b").grad : nullptr,
                               true);
  d.c = last_c;
  d.h = last_h;
  d.w = last_w;
  for (int i = 3; i >= 0; --i) {
    const std::string c = "conv" + std::to_string(i + 1);
    d = activation_backward(Act::leaky_relu, cache.bn_out[i], cache.act_out[i],
                            d, kLeakySlope);
    if (i > 0) {
      const std::string b = "bn" + std::to_string(i + 1);
      d = batchnorm_backward(
          cache.bn[i - 1], p.at(b + ".gamma").value, d,
          param_grads ? &p.at(b + ".gamma").grad : nullptr,
          param_grads ? &p.at(b + ".beta").grad : nullptr);
    }
    const Tensor4& x_in = i == 0 ? cache.x : cache.act_out[i - 1];
    d = conv2d_backward(x_in, p.at(c + ".w").value, d, 2, 1,
                        param_grads ? &p.at(c + ".w").grad : nullptr,
                        param_grads ? &p.at(c + ".b").grad : nullptr,
                        need_dx || i > 0);
  }
  return need_dx ? std::move(d) : Tensor4();
}

Tensor4 forward_s(const DetArch& a, ParamStore& p, const Tensor4& x,
                  DetCache* cache) {
  if (x.c != a.img_channels || x.h != a.img_size || x.w != a.img_size)
    throw usage_error("steganalyser input shape mismatch: " + x.shape_str());
  DetCache local;
  DetCache& cc = cache ? *cache : local;
  cc.x = x;
  cc.residual = conv2d(replicate_pad2(x), p.at("hpf.w").value, Tensor4(), 1, 0);
  const Act act =
      a.nonlin == DetNonlin::gaussian ? Act::gaussian : Act::leaky_relu;
  Tensor4 cur = cc.residual;
  for (int i = 0; i < 4; ++i) {
    const std::string c = "conv" + std::to_string(i + 1);
    cc.conv_out[i] =
        conv2d(cur, p.at(c + ".w").value, p.at(c + ".b").value, 1, 2);
    cc.act_out[i] = activation(act, cc.conv_out[i], kLeakySlope);
    cc.pool_out[i] = pool_avg(cc.act_out[i], 2, 2);
    cur = cc.pool_out[i];
  }
  Tensor4 flat = cur;
  flat.c = cur.c * cur.h * cur.w;
  flat.h = 1;
  flat.w = 1;
  cc.fc1_out = fully_connected(flat, p.at("fc1.w").value, p.at("fc1.b").value);
  cc.fc1_act = activation(Act::leaky_relu, cc.fc1_out, kLeakySlope);
  cc.logits =
      fully_connected(cc.fc1_act, p.at("fc2.w").value, p.at("fc2.b").value);
  cc.probs = softmax(cc.logits);
  return cc.probs;
}

Tensor4 backward_s(const DetArch& a, ParamStore& p, const DetCache& cache,
                   const Tensor4& dprobs, bool param_grads, bool need_dx) {
  const Act act =
      a.nonlin == DetNonlin::gaussian ? Act::gaussian : Act::leaky_relu;
  Tensor4 d = softmax_backward(cache.probs, dprobs);
  d = fully_connected_backward(cache.fc1_act, p.at("fc2.w").value, d,
                               param_grads ? &p.at("fc2.w").grad : nullptr,
                               param_grads ? &p.at("fc2.b").grad : nullptr,
                               true);
  d = activation_backward(Act::leaky_relu, cache.fc1_out, cache.fc1_act, d,
                          kLeakySlope);
  Tensor4 flat = cache.pool_out[3];
  const int last_c = flat.c, last_h = flat.h, last_w = flat.w;
  flat.c = last_c * last_h * last_w;
  flat.h = 1;
  flat.w = 1;
  d = fully_connected_backward(flat, p.at("fc1.w").value, d,
                               param_grads ? &p.at("fc1.w").grad : nullptr,
                               param_grads ? &p.at("fc1.b").grad : nullptr,
                               true);
  d.c = last_c;
  d.h = last_h;
  d.w = last_w;
  for (int i = 3; i >= 0; --i) {
    const std::string c = "conv" + std::to_string(i + 1);
    d = pool_avg_backward(2, 2, cache.act_out[i].h, cache.act_out[i].w, d);
    d = activation_backward(act, cache.conv_out[i], cache.act_out[i], d,
                            kLeakySlope);
    const Tensor4& x_in = i == 0 ? cache.residual : cache.pool_out[i - 1];
    d = conv2d_backward(x_in, p.at(c + ".w").value, d, 1, 2,
                        param_grads ? &p.at(c + ".w").grad : nullptr,
                        param_grads ? &p.at(c + ".b").grad : nullptr,
                        need_dx || i > 0);
  }
  if (!need_dx) return Tensor4();
  // Through the frozen filter: backward-data only, no weight gradient.
  const Tensor4 dpad = conv2d_backward(replicate_pad2(cache.x),
                                       p.at("hpf.w").value, d, 1, 0, nullptr,
                                       nullptr, true);
  return replicate_pad2_adjoint(dpad, cache.x.h, cache.x.w);
}

void clip_weights(ParamStore& p, double c) {
  if (!(c > 0.0)) throw usage_error("clip bound must be positive");
  for (auto& [name, prm] : p) {
    if (!prm.trainable || prm.is_state) continue;
    for (double& v : prm.value.v) {
      if (v > c) v = c;
      if (v < -c) v = -c;
    }
  }
}

uint64_t hpf_hash(const ParamStore& p) {
  const Tensor4& w = p.at("hpf.w").value;
  return fnv1a64(w.v.data(), w.size() * sizeof(double));
}

}  // namespace steglab
