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

#ifndef STEGLAB_HARNESS_HPP
#define STEGLAB_HARNESS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "steglab/image.hpp"
#include "steglab/params.hpp"
#include "steglab/stego.hpp"
#include "steglab/tensor.hpp"
#include "steglab/trainer.hpp"

namespace steglab {

struct ManifestEntry {
  std::string path;  // relative to the manifest file's directory
  int label = 0;     // cover = 0, stego = 1
  std::string provenance;
};

struct CorpusManifest {
  std::string name;
  std::string split;  // train | test | mixed
  double payload = 0.0;
  std::string key_policy;  // none | fixed | per-image
  std::vector<ManifestEntry> entries;
  std::string base_dir;  // where the manifest lives; not serialized
};

void save_manifest(const CorpusManifest& m, const std::string& path);
CorpusManifest load_manifest(const std::string& path);

/// Loaded corpus, all images stacked; labels parallel to the batch axis.
struct LabeledImages {
  Tensor4 images;
  std::vector<int> labels;
};

/// Reads every manifest entry; label filter < 0 keeps all.
LabeledImages load_corpus(const CorpusManifest& m, int label_filter = -1);

/// Center-crop every decodable PNG under src_dir to crop x crop, write the
/// crops under out_dir/train and out_dir/test with a seeded 90/10-style
/// split (test count = floor(N * (1 - split))), and write both manifests.
/// grayscale converts crops to single-channel luma before saving.
std::pair<CorpusManifest, CorpusManifest> prepare_dataset(
    const std::string& src_dir, const std::string& out_dir, int crop,
    double split, uint64_t seed, bool grayscale = false);

/// Embeds fresh random bits into every label-0 entry, writing stegos under
/// out_dir/stego; returns the combined cover+stego manifest (2N entries).
CorpusManifest build_stego_corpus(const CorpusManifest& covers,
                                  const std::string& out_dir, double payload,
                                  KeyPolicy policy, uint64_t seed);

/// Covers sampled from a checkpointed generator plus their stegos, written
/// under out_dir; the corpus is fully determined by (checkpoint, n, seed).
CorpusManifest build_generated_corpus(const Checkpoint& gan, int n,
                                      uint64_t seed, double payload,
                                      KeyPolicy policy,
                                      const std::string& out_dir);

struct DetectorPreset {
  std::string name;  // "s" | "s-star"
  DetArch arch;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.99;
};

/// "s": leaky-ReLU stages at the standard rate. "s-star": the Gaussian
/// non-linearity variant at learning rate 5e-6 with beta1 = 0.9. The desk
/// flag shrinks the stage widths for single-core runs.
DetectorPreset detector_preset(const std::string& name, int img_channels,
                               bool desk);

struct DetectorEpochRow {
  int epoch;
  double train_loss;
  double train_accuracy;
  double val_accuracy;
};

struct DetectorResult {
  Checkpoint checkpoint;
  std::vector<DetectorEpochRow> history;
};

/// Binary cross-entropy training of a standalone steganalyser on a labeled
/// corpus with an internal seeded 90/10 train/validation split. Throws
/// usage_error when the corpus is single-class.
DetectorResult train_detector(const DetectorPreset& preset,
                              const LabeledImages& corpus, int epochs,
                              uint64_t seed);

void write_detector_history_csv(const std::vector<DetectorEpochRow>& rows,
                                const std::string& path);

struct EvalReport {
  std::string detector_id;
  std::string corpus_id;
  double accuracy = 0;
  double false_positive_rate = 0;
  double false_negative_rate = 0;
  int n_samples = 0;
  double wall_time = 0;
};

/// Accuracy and error rates of a checkpointed detector over a corpus.
EvalReport evaluate_detector(const Checkpoint& det,
                             const LabeledImages& corpus,
                             const std::string& detector_id,
                             const std::string& corpus_id);

/// Appends one row per report, creating the file with a header when absent;
/// run_id keys repeated experiments into one comparable table.
void append_results_csv(const std::string& path, const std::string& run_id,
                        const std::vector<EvalReport>& reports);

struct SeedExperimentSpec {
  int n_images = 500;       // covers per condition
  uint64_t train_seed = 1;  // generation seed the detector was trained on
  uint64_t eval_seed = 2;   // fresh seed for S2/S3
  int tune_epochs = 2;      // extra generator tuning for S3
  double payload = 0.4;
};

/// S1: regenerate the detector-training corpus. S2: fresh seed. S3: fresh
/// seed after tune_epochs of additional game training on real covers.
std::vector<EvalReport> run_seed_experiments(
    const Checkpoint& gan, const Checkpoint& det,
    const CorpusManifest& covers_for_tuning, const SeedExperimentSpec& spec,
    const std::string& out_dir);

struct TimingRow {
  std::string run;
  int epoch = 0;       // -1 marks aggregate rows
  int batches = 0;
  double total_seconds = 0;
};

/// Reference wall-clock totals for the comparison rows (minutes).
constexpr double kReferenceSganMinutes = 227.5;
constexpr double kReferenceSsganMinutes = 240.3;

/// Aggregates a per-batch timing CSV into per-epoch and total rows; the
/// reference rows are appended when requested. An empty log yields an empty
/// table and success.
std::vector<TimingRow> timing_report(const std::string& timing_csv,
                                     const std::string& out_csv,
                                     bool with_reference);

/// Smooth low-frequency images (gradients, soft blobs) with no high-pass
/// texture, written as PNGs; the residual of a clean one is near zero, which
/// makes ±1 embedding maximally visible to a trained detector.
void synth_photo_corpus(const std::string& out_dir, int n, uint64_t seed,
                        int channels, int size);

/// Two pattern modes (vertical and horizontal 8x8 stripes) upscaled to the
/// target size with slight seeded brightness jitter.
void synth_twomode_corpus(const std::string& out_dir, int n, uint64_t seed,
                          int channels, int size);

/// Tiles images (all one shape) into a cols-wide grid.
PixelImage montage(const std::vector<PixelImage>& imgs, int cols);

struct TrainOutputs {
  std::vector<LossReport> reports;
  std::string checkpoint_path;
  std::string metrics_path;
  std::string timing_path;
  std::string samples_path;
};

/// Full training run over the label-0 entries of a manifest: epochs of the
/// game schedule, then metrics.csv, timing.csv, checkpoint.bin and a sample
/// grid under out_dir. metrics.csv and checkpoint.bin are bitwise functions
/// of (config, corpus); wall times live only in timing.csv.
TrainOutputs run_training(const TrainingConfig& cfg,
                          const CorpusManifest& covers,
                          const std::string& out_dir);

}  // namespace steglab

#endif
