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

#include "steglab/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "steglab/errors.hpp"

namespace steglab {

using nlohmann::json;

namespace {

constexpr double kProbEps = 1e-7;

double clamp01(double p) {
  return p < kProbEps ? kProbEps : (p > 1.0 - kProbEps ? 1.0 - kProbEps : p);
}

std::vector<double> scores_of(const Tensor4& t) { return t.v; }

std::vector<double> stego_prob_of(const Tensor4& probs) {
  std::vector<double> p(static_cast<size_t>(probs.n));
  for (int i = 0; i < probs.n; ++i) p[i] = probs.v[static_cast<size_t>(i) * 2 + 1];
  return p;
}

std::vector<double> one_minus(const std::vector<double>& p) {
  std::vector<double> q(p.size());
  for (size_t i = 0; i < p.size(); ++i) q[i] = 1.0 - p[i];
  return q;
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw usage_error("alpha must lie in [0,1]");
  if (!(gamma_g > 0.0) || !(gamma_d > 0.0) || !(gamma_s > 0.0))
    throw usage_error("learning rates must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw usage_error("beta1 and beta2 must lie in [0,1)");
  if (batch_size < 1) throw usage_error("batch_size must be >= 1");
  if (g_steps_per_batch < 1 || d_steps < 1 || s_steps < 1)
    throw usage_error("step counts must be >= 1");
  if (!(clip_c > 0.0)) throw usage_error("clip_c must be positive");
  if (!(payload > 0.0 && payload <= 1.0))
    throw usage_error("payload must lie in (0,1]");
  if (epochs < 1) throw usage_error("epochs must be >= 1");
  if (g.z_dim < 1) throw usage_error("z_dim must be positive");
  if (g.base < 8 || g.base % 8 != 0)
    throw usage_error("generator base must be a positive multiple of 8");
  if (d.base < 1) throw usage_error("discriminator base must be >= 1");
  for (int w : s.widths)
    if (w < 1) throw usage_error("steganalyser widths must be positive");
  if (s.fc_hidden < 1) throw usage_error("fc_hidden must be positive");
  if (g.img_channels != d.img_channels || g.img_channels != s.img_channels)
    throw usage_error("players disagree on image channels");
  if (g.img_size != 64 || d.img_size != 64 || s.img_size != 64)
    throw usage_error("image size is fixed at 64");
}

TrainingConfig training_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw data_error(std::string("config is not valid JSON: ") + e.what());
  }
  TrainingConfig c;
  try {
    const json game = j.value("game", json::object());
    c.alpha = game.value("alpha", c.alpha);
    c.payload = game.value("payload", c.payload);
    c.clip_c = game.value("clip_c", c.clip_c);
    c.batch_size = game.value("batch_size", c.batch_size);
    c.epochs = game.value("epochs", c.epochs);
    c.master_seed = game.value("master_seed", c.master_seed);
    c.g_steps_per_batch = game.value("g_steps_per_batch", c.g_steps_per_batch);
    c.d_steps = game.value("d_steps", c.d_steps);
    c.s_steps = game.value("s_steps", c.s_steps);
    const std::string mode = game.value("loss_mode", std::string("log-gan"));
    if (mode == "log-gan")
      c.loss_mode = LossMode::log_gan;
    else if (mode == "wgan-critic")
      c.loss_mode = LossMode::wgan_critic;
    else
      throw data_error("unknown loss_mode: " + mode);

    const json opt = j.value("optimizer", json::object());
    const std::string om = opt.value("mode", std::string("rmsprop-momentum"));
    if (om == "rmsprop-momentum")
      c.optim_mode = OptimMode::rmsprop_momentum;
    else if (om == "adam")
      c.optim_mode = OptimMode::adam;
    else
      throw data_error("unknown optimizer mode: " + om);
    c.gamma_g = opt.value("gamma_g", c.gamma_g);
    c.gamma_d = opt.value("gamma_d", c.gamma_d);
    c.gamma_s = opt.value("gamma_s", c.gamma_s);
    c.beta1 = opt.value("beta1", c.beta1);
    c.beta2 = opt.value("beta2", c.beta2);

    const json gen = j.value("generator", json::object());
    c.g.z_dim = gen.value("z_dim", c.g.z_dim);
    c.g.base = gen.value("base", c.g.base);

    const json dis = j.value("discriminator", json::object());
    c.d.base = dis.value("base", c.d.base);

    const json det = j.value("steganalyser", json::object());
    if (det.contains("widths")) {
      const auto w = det.at("widths").get<std::vector<int>>();
      if (w.size() != 4)
        throw data_error("steganalyser widths must list 4 stages");
      std::copy(w.begin(), w.end(), c.s.widths.begin());
    }
    c.s.fc_hidden = det.value("fc_hidden", c.s.fc_hidden);
    const std::string nl = det.value("nonlin", std::string("leaky-relu"));
    if (nl == "leaky-relu")
      c.s.nonlin = DetNonlin::leaky_relu;
    else if (nl == "gaussian")
      c.s.nonlin = DetNonlin::gaussian;
    else
      throw data_error("unknown steganalyser nonlin: " + nl);

    const json data = j.value("data", json::object());
    const int channels = data.value("img_channels", c.g.img_channels);
    const int size = data.value("img_size", 64);
    c.g.img_channels = c.d.img_channels = c.s.img_channels = channels;
    c.g.img_size = c.d.img_size = c.s.img_size = size;
  } catch (const json::exception& e) {
    throw data_error(std::string("config field has wrong type: ") + e.what());
  }
  c.d.sigmoid_head = c.loss_mode == LossMode::log_gan;
  c.validate();
  return c;
}

std::string training_config_to_json(const TrainingConfig& c) {
  json j;
  j["game"] = {
      {"alpha", c.alpha},
      {"payload", c.payload},
      {"clip_c", c.clip_c},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"master_seed", c.master_seed},
      {"g_steps_per_batch", c.g_steps_per_batch},
      {"d_steps", c.d_steps},
      {"s_steps", c.s_steps},
      {"loss_mode",
       c.loss_mode == LossMode::log_gan ? "log-gan" : "wgan-critic"},
  };
  j["optimizer"] = {
      {"mode", c.optim_mode == OptimMode::rmsprop_momentum ? "rmsprop-momentum"
                                                           : "adam"},
      {"gamma_g", c.gamma_g},
      {"gamma_d", c.gamma_d},
      {"gamma_s", c.gamma_s},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
  };
  j["generator"] = {{"z_dim", c.g.z_dim}, {"base", c.g.base}};
  j["discriminator"] = {{"base", c.d.base}};
  j["steganalyser"] = {
      {"widths", std::vector<int>(c.s.widths.begin(), c.s.widths.end())},
      {"fc_hidden", c.s.fc_hidden},
      {"nonlin",
       c.s.nonlin == DetNonlin::leaky_relu ? "leaky-relu" : "gaussian"},
  };
  j["data"] = {{"img_channels", c.g.img_channels},
               {"img_size", c.g.img_size}};
  return j.dump(2) + "\n";
}

TrainingConfig load_training_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw data_error("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return training_config_from_json(text);
}

void save_training_config(const TrainingConfig& cfg, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw data_error("cannot write config: " + path);
  os << training_config_to_json(cfg);
}

TrainingConfig desk_config() {
  TrainingConfig c;
  c.g.base = 64;
  c.d.base = 16;
  c.s.widths = {8, 16, 32, 64};
  c.s.fc_hidden = 128;
  return c;
}

JointLoss joint_loss(const std::vector<double>& d_real,
                     const std::vector<double>& d_fake,
                     const std::vector<double>& s_stego,
                     const std::vector<double>& s_cover, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw usage_error("alpha must lie in [0,1]");
  JointLoss out{};
  out.j_adversarial = mean_log(d_real) + mean_log(one_minus(d_fake));
  out.j_stego = mean_log(s_stego) + mean_log(one_minus(s_cover));
  out.j_total = alpha * out.j_adversarial + (1.0 - alpha) * out.j_stego;
  return out;
}

SsganGame::SsganGame(const TrainingConfig& cfg)
    : cfg_(cfg),
      og_(OptimConfig{cfg.optim_mode, cfg.gamma_g, cfg.beta1, cfg.beta2, 1e-8}),
      od_(OptimConfig{cfg.optim_mode, cfg.gamma_d, cfg.beta1, cfg.beta2, 1e-8}),
      os_(OptimConfig{cfg.optim_mode, cfg.gamma_s, cfg.beta1, cfg.beta2, 1e-8}),
      noise_rng_(Rng::stream(cfg.master_seed, rng_tag::noise)),
      stego_rng_(Rng::stream(cfg.master_seed, rng_tag::stego)),
      data_rng_(Rng::stream(cfg.master_seed, rng_tag::data_order)) {
  cfg_.d.sigmoid_head = cfg_.loss_mode == LossMode::log_gan;
  cfg_.validate();
  Rng rg = Rng::stream(cfg_.master_seed, rng_tag::init_g);
  Rng rd = Rng::stream(cfg_.master_seed, rng_tag::init_d);
  Rng rs = Rng::stream(cfg_.master_seed, rng_tag::init_s);
  build_generator(cfg_.g, g_, rg);
  build_discriminator(cfg_.d, d_, rd);
  build_steganalyser(cfg_.s, s_, rs);
  hpf_hash_ref_ = hpf_hash(s_);
}

SsganGame::SsganGame(const TrainingConfig& cfg, const Checkpoint& ck,
                     uint64_t fresh_seed)
    : cfg_(cfg),
      og_(OptimConfig{cfg.optim_mode, cfg.gamma_g, cfg.beta1, cfg.beta2, 1e-8}),
      od_(OptimConfig{cfg.optim_mode, cfg.gamma_d, cfg.beta1, cfg.beta2, 1e-8}),
      os_(OptimConfig{cfg.optim_mode, cfg.gamma_s, cfg.beta1, cfg.beta2, 1e-8}),
      noise_rng_(Rng::stream(fresh_seed, rng_tag::noise)),
      stego_rng_(Rng::stream(fresh_seed, rng_tag::stego)),
      data_rng_(Rng::stream(fresh_seed, rng_tag::data_order)) {
  cfg_.d.sigmoid_head = cfg_.loss_mode == LossMode::log_gan;
  cfg_.validate();
  bool got_g = false, got_d = false, got_s = false;
  for (const auto& sec : ck.sections) {
    if (sec.name == "g") {
      g_ = sec.params;
      if (sec.optim) og_ = *sec.optim;
      got_g = true;
    } else if (sec.name == "d") {
      d_ = sec.params;
      if (sec.optim) od_ = *sec.optim;
      got_d = true;
    } else if (sec.name == "s") {
      s_ = sec.params;
      if (sec.optim) os_ = *sec.optim;
      got_s = true;
    }
  }
  if (!got_g || !got_d || !got_s)
    throw data_error("checkpoint lacks a g/d/s section");
  hpf_hash_ref_ = hpf_hash(s_);
}

StepDResult SsganGame::step_d(const Tensor4& real) {
  if (real.n < 1) throw usage_error("empty real batch");
  const int n = real.n;
  d_.zero_grads();
  Tensor4 z = sample_noise(n, cfg_.g.z_dim, noise_rng_);
  const Tensor4 fake = forward_g(cfg_.g, g_, z, BnMode::train, false, nullptr);

  DiscCache cr, cf;
  const Tensor4 sr = forward_d(cfg_.d, d_, real, BnMode::train, true, &cr);
  const Tensor4 sf = forward_d(cfg_.d, d_, fake, BnMode::train, true, &cf);
  StepDResult out;
  out.p_real = scores_of(sr);
  out.p_fake = scores_of(sf);

  Tensor4 dreal(n, 1, 1, 1), dfake(n, 1, 1, 1);
  if (cfg_.loss_mode == LossMode::log_gan) {
    out.loss = mean_log(out.p_real) + mean_log(one_minus(out.p_fake));
    // Ascent as descent on the negated objective.
    for (int i = 0; i < n; ++i) {
      dreal.v[i] = -1.0 / (n * clamp01(out.p_real[i]));
      dfake.v[i] = 1.0 / (n * clamp01(1.0 - out.p_fake[i]));
    }
    int correct = 0;
    for (double p : out.p_real) correct += p > 0.5;
    for (double p : out.p_fake) correct += p <= 0.5;
    out.accuracy = static_cast<double>(correct) / (2.0 * n);
  } else {
    double mr = 0, mf = 0;
    for (double v : out.p_real) mr += v;
    for (double v : out.p_fake) mf += v;
    out.loss = (mr - mf) / n;
    for (int i = 0; i < n; ++i) {
      dreal.v[i] = -1.0 / n;
      dfake.v[i] = 1.0 / n;
    }
    int correct = 0;
    for (int i = 0; i < n; ++i) correct += out.p_real[i] > out.p_fake[i];
    out.accuracy = static_cast<double>(correct) / n;
  }
  if (!std::isfinite(out.loss))
    throw numeric_error("discriminator loss is not finite");
  backward_d(cfg_.d, d_, cr, dreal, true, false);
  backward_d(cfg_.d, d_, cf, dfake, true, false);
  optim_step(d_, od_);
  if (cfg_.loss_mode == LossMode::wgan_critic) clip_weights(d_, cfg_.clip_c);
  return out;
}

StepSResult SsganGame::step_s() {
  const int n = cfg_.batch_size;
  s_.zero_grads();
  Tensor4 z = sample_noise(n, cfg_.g.z_dim, noise_rng_);
  const Tensor4 fake = forward_g(cfg_.g, g_, z, BnMode::train, false, nullptr);
  const Tensor4 stego =
      stego_batch(fake, cfg_.payload, KeyPolicy::per_image_key, stego_rng_);

  DetCache cs, cc;
  const Tensor4 ps = forward_s(cfg_.s, s_, stego, &cs);
  const Tensor4 pc = forward_s(cfg_.s, s_, fake, &cc);
  StepSResult out;
  out.p_stego = stego_prob_of(ps);
  out.p_cover = stego_prob_of(pc);
  out.loss = mean_log(out.p_stego) + mean_log(one_minus(out.p_cover));
  if (!std::isfinite(out.loss))
    throw numeric_error("steganalyser loss is not finite");

  Tensor4 dps(n, 2, 1, 1), dpc(n, 2, 1, 1);
  for (int i = 0; i < n; ++i) {
    dps.v[static_cast<size_t>(i) * 2 + 1] =
        -1.0 / (n * clamp01(out.p_stego[i]));
    dpc.v[static_cast<size_t>(i) * 2 + 1] =
        1.0 / (n * clamp01(1.0 - out.p_cover[i]));
  }
  backward_s(cfg_.s, s_, cs, dps, true, false);
  backward_s(cfg_.s, s_, cc, dpc, true, false);
  optim_step(s_, os_);
  if (hpf_hash(s_) != hpf_hash_ref_)
    throw std::logic_error("frozen high-pass filter was mutated");

  int correct = 0;
  for (double p : out.p_stego) correct += p > 0.5;
  for (double p : out.p_cover) correct += p <= 0.5;
  out.accuracy = static_cast<double>(correct) / (2.0 * n);
  return out;
}

StepGResult SsganGame::compute_g_gradients(const Tensor4& z, double alpha,
                                           bool update_running) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw usage_error("alpha must lie in [0,1]");
  const int n = z.n;
  g_.zero_grads();
  GenCache cg;
  const Tensor4 fake =
      forward_g(cfg_.g, g_, z, BnMode::train, update_running, &cg);
  Tensor4 dy(fake.n, fake.c, fake.h, fake.w);
  StepGResult out;
  if (alpha > 0.0) {
    DiscCache cd;
    const Tensor4 s = forward_d(cfg_.d, d_, fake, BnMode::train, false, &cd);
    std::vector<double> p = scores_of(s);
    if (cfg_.loss_mode == LossMode::log_gan) {
      out.adv_term = mean_log(one_minus(p));
      Tensor4 ds(n, 1, 1, 1);
      for (int i = 0; i < n; ++i)
        ds.v[i] = -alpha / (n * clamp01(1.0 - p[i]));
      const Tensor4 dx = backward_d(cfg_.d, d_, cd, ds, false, true);
      for (size_t i = 0; i < dy.size(); ++i) dy.v[i] += dx.v[i];
    } else {
      // G descends -mean D(G(z)) in critic mode.
      double m = 0;
      for (double v : p) m += v;
      out.adv_term = -m / n;
      Tensor4 ds(n, 1, 1, 1);
      for (int i = 0; i < n; ++i) ds.v[i] = -alpha / n;
      const Tensor4 dx = backward_d(cfg_.d, d_, cd, ds, false, true);
      for (size_t i = 0; i < dy.size(); ++i) dy.v[i] += dx.v[i];
    }
  }
  if (alpha < 1.0) {
    DetCache cs;
    const Tensor4 probs = forward_s(cfg_.s, s_, fake, &cs);
    std::vector<double> p = stego_prob_of(probs);
    out.stego_term = mean_log(one_minus(p));
    Tensor4 dp(n, 2, 1, 1);
    for (int i = 0; i < n; ++i)
      dp.v[static_cast<size_t>(i) * 2 + 1] =
          -(1.0 - alpha) / (n * clamp01(1.0 - p[i]));
    const Tensor4 dx = backward_s(cfg_.s, s_, cs, dp, false, true);
    for (size_t i = 0; i < dy.size(); ++i) dy.v[i] += dx.v[i];
  }
  if (!std::isfinite(out.adv_term) || !std::isfinite(out.stego_term))
    throw numeric_error("generator loss is not finite");
  backward_g(cfg_.g, g_, cg, dy);
  return out;
}

StepGResult SsganGame::step_g() {
  Tensor4 z = sample_noise(cfg_.batch_size, cfg_.g.z_dim, noise_rng_);
  StepGResult out = compute_g_gradients(z, cfg_.alpha, true);
  optim_step(g_, og_);
  return out;
}

LossReport SsganGame::train_batch(const Tensor4& real, int epoch, int batch) {
  const auto t0 = std::chrono::steady_clock::now();
  StepDResult dres;
  for (int i = 0; i < cfg_.d_steps; ++i) dres = step_d(real);
  StepSResult sres;
  for (int i = 0; i < cfg_.s_steps; ++i) sres = step_s();
  for (int i = 0; i < cfg_.g_steps_per_batch; ++i) step_g();
  const auto t1 = std::chrono::steady_clock::now();

  LossReport rep;
  rep.epoch = epoch;
  rep.batch = batch;
  if (cfg_.loss_mode == LossMode::log_gan) {
    const JointLoss jl = joint_loss(dres.p_real, dres.p_fake, sres.p_stego,
                                    sres.p_cover, cfg_.alpha);
    rep.j_total = jl.j_total;
    rep.j_adversarial = jl.j_adversarial;
    rep.j_stego = jl.j_stego;
  } else {
    rep.j_adversarial = dres.loss;
    rep.j_stego = sres.loss;
    rep.j_total =
        cfg_.alpha * rep.j_adversarial + (1.0 - cfg_.alpha) * rep.j_stego;
  }
  rep.d_accuracy = dres.accuracy;
  rep.s_accuracy = sres.accuracy;
  rep.wall_time = std::chrono::duration<double>(t1 - t0).count();
  if (!std::isfinite(rep.j_total))
    throw numeric_error("joint loss is not finite");
  return rep;
}

std::vector<LossReport> SsganGame::train_epoch(const Tensor4& dataset,
                                               int epoch) {
  if (dataset.n < 1) throw data_error("empty dataset");
  const int N = dataset.n, B = cfg_.batch_size;
  std::vector<size_t> order(static_cast<size_t>(N));
  std::iota(order.begin(), order.end(), size_t{0});
  data_rng_.shuffle(order);
  std::vector<LossReport> reports;
  const size_t img = static_cast<size_t>(dataset.c) * dataset.h * dataset.w;
  for (int b0 = 0, batch = 0; b0 < N; b0 += B, ++batch) {
    const int nb = std::min(B, N - b0);
    Tensor4 slice(nb, dataset.c, dataset.h, dataset.w);
    for (int i = 0; i < nb; ++i)
      std::memcpy(&slice.v[static_cast<size_t>(i) * img],
                  &dataset.v[order[static_cast<size_t>(b0) + i] * img],
                  img * sizeof(double));
    reports.push_back(train_batch(slice, epoch, batch));
  }
  return reports;
}

Checkpoint SsganGame::to_checkpoint() const {
  Checkpoint ck;
  ck.master_seed = cfg_.master_seed;
  ck.meta_json = training_config_to_json(cfg_);
  ck.sections.push_back({"d", d_, od_});
  ck.sections.push_back({"g", g_, og_});
  ck.sections.push_back({"s", s_, os_});
  return ck;
}

std::vector<PixelImage> generate(const Checkpoint& ck, int n, uint64_t seed) {
  if (n < 0) throw usage_error("image count must be >= 0");
  if (n == 0) return {};
  const TrainingConfig cfg = training_config_from_json(ck.meta_json);
  const ParamStore* g = nullptr;
  for (const auto& sec : ck.sections)
    if (sec.name == "g") g = &sec.params;
  if (!g) throw data_error("checkpoint lacks a generator section");
  ParamStore params = *g;  // eval-mode forward still needs mutable refs
  Rng rng = Rng::stream(seed, rng_tag::noise);
  std::vector<PixelImage> out;
  out.reserve(static_cast<size_t>(n));
  for (int done = 0; done < n;) {
    const int nb = std::min(64, n - done);
    Tensor4 z = sample_noise(nb, cfg.g.z_dim, rng);
    const Tensor4 y =
        forward_g(cfg.g, params, z, BnMode::eval, false, nullptr);
    for (auto& img : from_tensor(y)) out.push_back(std::move(img));
    done += nb;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_metrics_csv(const std::vector<LossReport>& reports,
                       const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw data_error("cannot write metrics csv: " + path);
  os << "epoch,batch,j_total,j_adversarial,j_stego,d_accuracy,s_accuracy\n";
  for (const auto& r : reports)
    os << r.epoch << ',' << r.batch << ',' << format_double(r.j_total) << ','
       << format_double(r.j_adversarial) << ',' << format_double(r.j_stego)
       << ',' << format_double(r.d_accuracy) << ','
       << format_double(r.s_accuracy) << '\n';
  if (!os.flush()) throw data_error("metrics csv write failed: " + path);
}

void write_timing_csv(const std::vector<LossReport>& reports,
                      const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw data_error("cannot write timing csv: " + path);
  os << "epoch,batch,wall_seconds\n";
  for (const auto& r : reports)
    os << r.epoch << ',' << r.batch << ',' << format_double(r.wall_time)
       << '\n';
  if (!os.flush()) throw data_error("timing csv write failed: " + path);
}

}  // namespace steglab
