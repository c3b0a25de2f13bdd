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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "steglab/errors.hpp"
#include "steglab/gradcheck.hpp"
#include "steglab/networks.hpp"
#include "steglab/nn.hpp"
#include "steglab/params.hpp"
#include "steglab/rng.hpp"

using namespace steglab;

namespace {

// Small enough to keep full-network finite differences quick, but with all
// four stages live.
GenArch tiny_g() {
  GenArch a;
  a.base = 8;  // channels 8, 4, 2, 1
  a.img_channels = 1;
  return a;
}

DiscArch tiny_d() {
  DiscArch a;
  a.base = 4;
  a.img_channels = 1;
  return a;
}

DetArch tiny_s() {
  DetArch a;
  a.widths = {2, 3, 4, 5};
  a.fc_hidden = 8;
  a.img_channels = 1;
  return a;
}

Tensor4 random_images(int n, int c, Rng& rng) {
  Tensor4 t(n, c, 64, 64);
  for (auto& v : t.v) v = 0.9 * rng.uniform_sym();
  return t;
}

double dot(const Tensor4& a, const Tensor4& b) {
  REQUIRE(a.v.size() == b.v.size());
  double s = 0;
  for (size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

std::vector<GradCheckTarget> all_trainable(ParamStore& p,
                                           const char* prefix = "") {
  std::vector<GradCheckTarget> targets;
  for (auto& [name, param] : p) {
    if (!param.trainable || param.is_state) continue;
    targets.push_back({std::string(prefix) + name, &param.value, &param.grad});
  }
  return targets;
}

}  // namespace

TEST_SUITE("networks") {

TEST_CASE("the high-pass kernel is the published five-by-five") {
  const double want[5][5] = {{-1, 2, -2, 2, -1},
                             {2, -6, 8, -6, 2},
                             {-2, 8, -12, 8, -2},
                             {2, -6, 8, -6, 2},
                             {-1, 2, -2, 2, -1}};
  for (int r = 0; r < 5; ++r) {
    double row_sum = 0;
    for (int c = 0; c < 5; ++c) {
      CHECK(kHpfKernel[static_cast<size_t>(r * 5 + c)] == want[r][c]);
      row_sum += want[r][c];
    }
    CHECK(row_sum == 0.0);  // every row cancels constants on its own
  }
  CHECK(kHpfKernel[12] == -12.0);

  const Tensor4 k3 = hpf_kernel(3);
  REQUIRE(k3.n == 1);
  REQUIRE(k3.c == 3);
  REQUIRE(k3.h == 5);
  REQUIRE(k3.w == 5);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 25; ++i)
      CHECK(k3.at(0, c, i / 5, i % 5) == kHpfKernel[static_cast<size_t>(i)]);
}

TEST_CASE("hpf_residual kills constants and echoes impulses") {
  // 0.7 is not a dyadic rational, so a plain tap-times-sample sum would
  // leave product roundoff behind; the difference form keeps it exact.
  Tensor4 flat(2, 3, 16, 16);
  flat.fill(0.7);
  const Tensor4 r0 = hpf_residual(flat);
  REQUIRE(r0.c == 1);  // one residual plane regardless of input channels
  for (double v : r0.v) REQUIRE(v == 0.0);

  // A centered unit impulse in one channel reproduces the kernel around it
  // (the kernel is symmetric, so correlation equals convolution here).
  Tensor4 impulse(1, 3, 16, 16);
  impulse.at(0, 1, 8, 8) = 1.0;
  const Tensor4 r1 = hpf_residual(impulse);
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx)
      CHECK(r1.at(0, 0, 8 + dy, 8 + dx) ==
            kHpfKernel[static_cast<size_t>((dy + 2) * 5 + (dx + 2))]);
  CHECK(r1.at(0, 0, 8, 8) == -12.0);
  CHECK(r1.at(0, 0, 2, 2) == 0.0);  // far away nothing happens

  // Channel sum: the multichannel residual is the sum of per-channel ones.
  Rng rng(1);
  Tensor4 x(1, 3, 16, 16);
  for (auto& v : x.v) v = rng.uniform_sym();
  const Tensor4 together = hpf_residual(x);
  Tensor4 sum(1, 1, 16, 16);
  for (int c = 0; c < 3; ++c) {
    Tensor4 one(1, 1, 16, 16);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) one.at(0, 0, i, j) = x.at(0, c, i, j);
    const Tensor4 rc = hpf_residual(one);
    for (size_t i = 0; i < sum.v.size(); ++i) sum.v[i] += rc.v[i];
  }
  for (size_t i = 0; i < sum.v.size(); ++i)
    CHECK(together.v[i] == doctest::Approx(sum.v[i]).epsilon(1e-12));
}

TEST_CASE("hpf_residual needs at least the kernel footprint") {
  Tensor4 tiny(1, 1, 4, 4);
  CHECK_THROWS_AS((void)hpf_residual(tiny), usage_error);
}

TEST_CASE("generator builds the documented parameter set") {
  ParamStore p;
  Rng rng(2);
  build_generator(GenArch{}, p, rng);  // default: base 512, 3 channels
  CHECK(p.at("fc.w").value.same_shape(Tensor4(512 * 16, 100, 1, 1)));
  CHECK(p.at("tconv1.w").value.same_shape(Tensor4(512, 256, 4, 4)));
  CHECK(p.at("tconv2.w").value.same_shape(Tensor4(256, 128, 4, 4)));
  CHECK(p.at("tconv3.w").value.same_shape(Tensor4(128, 64, 4, 4)));
  CHECK(p.at("tconv4.w").value.same_shape(Tensor4(64, 3, 4, 4)));
  CHECK(p.at("bn4.gamma").value.same_shape(Tensor4(3, 1, 1, 1)));
  CHECK(p.at("bn4.run_mean").is_state);
  CHECK_FALSE(p.at("bn4.run_mean").trainable);
}

TEST_CASE("generator output is strictly inside the open interval") {
  ParamStore p;
  Rng rng(3);
  const GenArch a = tiny_g();
  build_generator(a, p, rng);
  // Blow up the last batch-norm scale to force tanh saturation. Scaling the
  // deconv weights would be undone by the normalisation right after them.
  for (auto& v : p.at("bn4.gamma").value.v) v *= 400.0;
  const Tensor4 z = sample_noise(4, a.z_dim, rng);
  const Tensor4 y = forward_g(a, p, z, BnMode::train, false, nullptr);
  REQUIRE(y.n == 4);
  REQUIRE(y.c == 1);
  REQUIRE(y.h == 64);
  REQUIRE(y.w == 64);
  bool saturated = false;
  for (double v : y.v) {
    REQUIRE(v > -1.0);
    REQUIRE(v < 1.0);
    if (std::abs(v) > 0.999999) saturated = true;
  }
  CHECK(saturated);  // the clamp actually engaged somewhere
}

TEST_CASE("sample_noise is uniform in the closed-open box") {
  Rng rng(4);
  const Tensor4 z = sample_noise(100, 100, rng);
  REQUIRE(z.n == 100);
  REQUIRE(z.c == 100);
  double mn = 1e9, mx = -1e9;
  for (double v : z.v) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(mn >= -1.0);
  CHECK(mx < 1.0);
  CHECK(mn < -0.99);
  CHECK(mx > 0.99);
}

TEST_CASE("discriminator head is a probability under the sigmoid") {
  ParamStore p;
  Rng rng(5);
  const DiscArch a = tiny_d();
  build_discriminator(a, p, rng);
  const Tensor4 x = random_images(3, 1, rng);
  const Tensor4 s = forward_d(a, p, x, BnMode::train, false, nullptr);
  REQUIRE(s.n == 3);
  REQUIRE(s.c == 1);
  for (double v : s.v) {
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }

  // Zeroing the head gives exactly 1/2.
  p.at("fc.w").value.zero();
  p.at("fc.b").value.zero();
  const Tensor4 half = forward_d(a, p, x, BnMode::train, false, nullptr);
  for (double v : half.v) CHECK(v == 0.5);
}

TEST_CASE("critic head is unbounded and skips the sigmoid") {
  ParamStore p;
  Rng rng(6);
  DiscArch a = tiny_d();
  a.sigmoid_head = false;
  build_discriminator(a, p, rng);
  const Tensor4 x = random_images(2, 1, rng);
  for (auto& v : p.at("fc.w").value.v) v *= 50.0;
  const Tensor4 s = forward_d(a, p, x, BnMode::train, false, nullptr);
  bool outside = false;
  for (double v : s.v)
    if (v < 0.0 || v > 1.0) outside = true;
  CHECK(outside);
}

TEST_CASE("steganalyser outputs a two-class distribution") {
  ParamStore p;
  Rng rng(7);
  const DetArch a = tiny_s();
  build_steganalyser(a, p, rng);
  const Tensor4 x = random_images(3, 1, rng);
  const Tensor4 probs = forward_s(a, p, x, nullptr);
  REQUIRE(probs.n == 3);
  REQUIRE(probs.c == 2);
  REQUIRE(probs.h == 1);
  REQUIRE(probs.w == 1);
  for (int n = 0; n < 3; ++n) {
    const double p0 = probs.at(n, 0, 0, 0);
    const double p1 = probs.at(n, 1, 0, 0);
    REQUIRE(p0 > 0.0);
    REQUIRE(p1 > 0.0);
    REQUIRE(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Zeroed final layer: both classes at exactly one half.
  p.at("fc2.w").value.zero();
  p.at("fc2.b").value.zero();
  const Tensor4 half = forward_s(a, p, x, nullptr);
  for (double v : half.v) CHECK(v == 0.5);
}

TEST_CASE("steganalyser keeps its filter frozen") {
  ParamStore p;
  Rng rng(8);
  build_steganalyser(tiny_s(), p, rng);
  CHECK_FALSE(p.at("hpf.w").trainable);
  const Tensor4 want = hpf_kernel(1);
  CHECK(p.at("hpf.w").value.v == want.v);

  const uint64_t h1 = hpf_hash(p);
  CHECK(h1 == hpf_hash(p));  // stable
  p.at("hpf.w").value.v[0] += 1.0;
  CHECK(hpf_hash(p) != h1);  // any touch is visible
}

TEST_CASE("generator gradients survive finite differences") {
  ParamStore p;
  Rng rng(9);
  const GenArch a = tiny_g();
  build_generator(a, p, rng);
  const Tensor4 z = sample_noise(2, a.z_dim, rng);
  Tensor4 proj(2, 1, 64, 64);
  for (auto& v : proj.v) v = rng.uniform_sym();

  const auto loss = [&]() {
    return dot(forward_g(a, p, z, BnMode::train, false, nullptr), proj);
  };
  p.zero_grads();
  GenCache cache;
  (void)forward_g(a, p, z, BnMode::train, false, &cache);
  backward_g(a, p, cache, proj);

  Rng pick(10);
  const GradCheckResult r =
      grad_check(loss, all_trainable(p), pick, 1e-5, 25);
  INFO(r.worst);
  CHECK(r.max_rel_err < 2e-5);
}

TEST_CASE("discriminator gradients survive finite differences") {
  ParamStore p;
  Rng rng(11);
  const DiscArch a = tiny_d();
  build_discriminator(a, p, rng);
  Tensor4 x = random_images(2, 1, rng);
  Tensor4 proj(2, 1, 1, 1);
  for (auto& v : proj.v) v = rng.uniform_sym();

  const auto loss = [&]() {
    return dot(forward_d(a, p, x, BnMode::train, false, nullptr), proj);
  };
  p.zero_grads();
  DiscCache cache;
  (void)forward_d(a, p, x, BnMode::train, false, &cache);
  const Tensor4 dx = backward_d(a, p, cache, proj, true, true);

  auto targets = all_trainable(p);
  targets.push_back({"x", &x, &dx});
  Rng pick(12);
  const GradCheckResult r = grad_check(loss, targets, pick, 1e-5, 25);
  INFO(r.worst);
  CHECK(r.max_rel_err < 2e-5);
}

TEST_CASE("steganalyser gradients survive finite differences") {
  for (const DetNonlin nonlin : {DetNonlin::leaky_relu, DetNonlin::gaussian}) {
    ParamStore p;
    Rng rng(13);
    DetArch a = tiny_s();
    a.nonlin = nonlin;
    build_steganalyser(a, p, rng);
    // The stock init shrinks activations by roughly 7x per stage at these
    // widths, parking thousands of pre-activations within finite-difference
    // reach of the leaky-relu kink. Rescale to probe at a well-conditioned
    // point; the check exercises the code, not the init.
    for (const char* name : {"conv1.w", "conv2.w", "conv3.w", "conv4.w"})
      for (auto& v : p.at(name).value.v) v *= 5.0;
    Tensor4 x = random_images(2, 1, rng);
    Tensor4 proj(2, 2, 1, 1);
    for (auto& v : proj.v) v = rng.uniform_sym();

    const auto loss = [&]() { return dot(forward_s(a, p, x, nullptr), proj); };
    p.zero_grads();
    DetCache cache;
    (void)forward_s(a, p, x, &cache);
    const Tensor4 dx = backward_s(a, p, cache, proj, true, true);

    auto targets = all_trainable(p);
    targets.push_back({"x", &x, &dx});
    Rng pick(14);
    const GradCheckResult r = grad_check(loss, targets, pick, 1e-5, 25);
    INFO(static_cast<int>(nonlin) << " " << r.worst);
    // One conv weight touches thousands of pre-activations, so for the
    // non-smooth path some probe always straddles a leaky-relu kink and
    // contributes ~0.1% no matter the step size. A wrong backward shows up
    // at 10-100% across many coordinates, far above either bound.
    CHECK(r.max_rel_err < (nonlin == DetNonlin::gaussian ? 2e-5 : 5e-3));
  }
}

TEST_CASE("frozen-filter gradients never reach the parameter store") {
  ParamStore p;
  Rng rng(15);
  const DetArch a = tiny_s();
  build_steganalyser(a, p, rng);
  const Tensor4 x = random_images(2, 1, rng);
  Tensor4 proj(2, 2, 1, 1);
  proj.fill(1.0);
  p.zero_grads();
  DetCache cache;
  (void)forward_s(a, p, x, &cache);
  (void)backward_s(a, p, cache, proj, true, false);
  for (double g : p.at("hpf.w").grad.v) CHECK(g == 0.0);
}

TEST_CASE("clip_weights boxes trainables and spares state") {
  ParamStore p;
  Rng rng(16);
  build_discriminator(tiny_d(), p, rng);
  for (auto& [name, param] : p)
    for (auto& v : param.value.v) v = 3.0 * rng.uniform_sym();
  const std::vector<double> rm_before = p.at("bn2.run_mean").value.v;

  clip_weights(p, 0.01);
  for (const auto& [name, param] : p) {
    if (param.is_state || !param.trainable) continue;
    for (double v : param.value.v) {
      REQUIRE(v <= 0.01);
      REQUIRE(v >= -0.01);
    }
  }
  CHECK(p.at("bn2.run_mean").value.v == rm_before);
}

TEST_CASE("builders reject malformed widths") {
  ParamStore p;
  Rng rng(17);
  GenArch bad_g;
  bad_g.base = 12;  // not divisible by 8
  CHECK_THROWS_AS(build_generator(bad_g, p, rng), usage_error);
  GenArch bad_size;
  bad_size.img_size = 32;
  ParamStore p2;
  CHECK_THROWS_AS(build_generator(bad_size, p2, rng), usage_error);
  DetArch bad_s;
  bad_s.img_size = 60;  // not a multiple of 16
  ParamStore p3;
  CHECK_THROWS_AS(build_steganalyser(bad_s, p3, rng), usage_error);
}

TEST_CASE("initialization is seed deterministic per network") {
  ParamStore a1, a2, b;
  Rng r1(18), r2(18), r3(19);
  build_generator(tiny_g(), a1, r1);
  build_generator(tiny_g(), a2, r2);
  build_generator(tiny_g(), b, r3);
  CHECK(a1.bitwise_equal(a2));
  CHECK_FALSE(a1.bitwise_equal(b));
}

}  // TEST_SUITE
