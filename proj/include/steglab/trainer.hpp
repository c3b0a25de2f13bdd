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

#ifndef STEGLAB_TRAINER_HPP
#define STEGLAB_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "steglab/image.hpp"
#include "steglab/networks.hpp"
#include "steglab/params.hpp"
#include "steglab/rng.hpp"
#include "steglab/stego.hpp"
#include "steglab/tensor.hpp"

namespace steglab {

enum class LossMode { log_gan, wgan_critic };

// The three-player game. G descends the joint objective
//   J = alpha * (mean log D(x) + mean log(1 - D(G(z))))
//     + (1-alpha) * (mean log S(Stego(G(z))) + mean log(1 - S(G(z))))
// while D and S each ascend it. The embedding operator is not
// differentiable, so G's gradient flows only through the two (1 - .) terms;
// the alpha weight applies to both of G's terms, taking the derivative of
// the joint objective at face value.
struct TrainingConfig {
  double alpha = 0.85;
  double gamma_g = 2e-4;
  double gamma_d = 2e-4;
  double gamma_s = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.99;
  int batch_size = 64;
  int g_steps_per_batch = 2;
  int d_steps = 1;
  int s_steps = 1;
  LossMode loss_mode = LossMode::log_gan;
  OptimMode optim_mode = OptimMode::rmsprop_momentum;
  double clip_c = 0.01;
  double payload = 0.4;
  uint64_t master_seed = 1;
  int epochs = 1;
  GenArch g;
  DiscArch d;
  DetArch s;

  void validate() const;  // throws usage_error on out-of-range fields
};

TrainingConfig training_config_from_json(const std::string& text);
std::string training_config_to_json(const TrainingConfig& cfg);
TrainingConfig load_training_config(const std::string& path);
void save_training_config(const TrainingConfig& cfg, const std::string& path);

/// Widths small enough for single-core experiments; everything else at the
/// standard defaults.
TrainingConfig desk_config();

struct LossReport {
  int epoch = 0;
  int batch = 0;
  double j_total = 0;
  double j_adversarial = 0;
  double j_stego = 0;
  double d_accuracy = 0;
  double s_accuracy = 0;
  double wall_time = 0;  // seconds, this batch
};

struct JointLoss {
  double j_total;
  double j_adversarial;
  double j_stego;
};

/// The joint objective on measured batch outputs. Probabilities are clamped
/// to [eps, 1-eps] before the logs; alpha must lie in [0,1].
JointLoss joint_loss(const std::vector<double>& d_real,
                     const std::vector<double>& d_fake,
                     const std::vector<double>& s_stego,
                     const std::vector<double>& s_cover, double alpha);

struct StepDResult {
  double loss = 0;  // the quantity D ascends
  double accuracy = 0;
  std::vector<double> p_real, p_fake;
};

struct StepSResult {
  double loss = 0;
  double accuracy = 0;
  std::vector<double> p_stego, p_cover;
};

struct StepGResult {
  double adv_term = 0;    // mean log(1 - D(G(z)))
  double stego_term = 0;  // mean log(1 - S(G(z)))
};

class SsganGame {
public:
  /// Fresh players initialized from per-purpose streams of master_seed, so
  /// e.g. the presence of S does not shift G's or D's initial weights.
  explicit SsganGame(const TrainingConfig& cfg);

  /// Players and optimizer state from a checkpoint; the RNG streams restart
  /// from fresh_seed (used for fine-tuning runs).
  SsganGame(const TrainingConfig& cfg, const Checkpoint& ck,
            uint64_t fresh_seed);

  /// One ascent step of D on the given real batch against fresh fakes.
  StepDResult step_d(const Tensor4& real);

  /// One ascent step of S on (G(z), Stego(G(z))) pairs, fresh noise, fresh
  /// random messages, per-image keys. The frozen filter hash is checked.
  StepSResult step_s();

  /// One descent step of G through the D and S branches, weighted alpha and
  /// 1-alpha; a zero-weight branch is skipped entirely.
  StepGResult step_g();

  /// Full per-batch schedule: d_steps x D, s_steps x S, g_steps x G.
  LossReport train_batch(const Tensor4& real, int epoch, int batch);

  /// Seeded shuffle, then train_batch per slice; ceil(N/B) reports.
  std::vector<LossReport> train_epoch(const Tensor4& dataset, int epoch);

  /// Fills G's gradient accumulators for the given noise without touching
  /// any other state (exposed for the endpoint and linearity checks).
  StepGResult compute_g_gradients(const Tensor4& z, double alpha,
                                  bool update_running = false);

  Checkpoint to_checkpoint() const;

  ParamStore& g_params() { return g_; }
  ParamStore& d_params() { return d_; }
  ParamStore& s_params() { return s_; }
  OptimState& g_optim() { return og_; }
  const TrainingConfig& config() const { return cfg_; }
  Rng& noise_rng() { return noise_rng_; }
  uint64_t filter_hash() const { return hpf_hash_ref_; }

private:
  TrainingConfig cfg_;
  ParamStore g_, d_, s_;
  OptimState og_, od_, os_;
  Rng noise_rng_, stego_rng_, data_rng_;
  uint64_t hpf_hash_ref_ = 0;
};

/// Noise -> images through an eval-mode forward of the checkpointed G,
/// quantized to pixels. Identical (checkpoint, n, seed) give identical
/// images; n = 0 gives an empty list.
std::vector<PixelImage> generate(const Checkpoint& ck, int n, uint64_t seed);

/// Deterministic column set (no wall times), one row per report.
void write_metrics_csv(const std::vector<LossReport>& reports,
                       const std::string& path);

/// Wall-clock columns only; consumed by the timing report.
void write_timing_csv(const std::vector<LossReport>& reports,
                      const std::string& path);

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

}  // namespace steglab

#endif
