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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "steglab/errors.hpp"
#include "steglab/harness.hpp"
#include "steglab/image.hpp"
#include "steglab/networks.hpp"
#include "steglab/nn.hpp"
#include "steglab/params.hpp"
#include "steglab/stego.hpp"
#include "steglab/trainer.hpp"

namespace fs = std::filesystem;
using namespace steglab;

namespace {

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw data_error("cannot open file: " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(is)),
                              std::istreambuf_iterator<char>());
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw data_error("cannot write file: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os.flush()) throw data_error("write failed: " + path);
}

int run(int argc, char** argv) {
  CLI::App app{"steglab: a steganography-aware GAN laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  uint64_t seed = 1;
  app.add_option("--config", config_path, "experiment config file (JSON)");
  app.add_option("--seed", seed, "master seed (64-bit)");
  app.add_option("--out", out_dir, "output directory");

  // prepare-data
  auto* prep = app.add_subcommand(
      "prepare-data", "center-crop a directory of images and split 90/10");
  prep->fallthrough();
  std::string src_dir;
  int crop = 64;
  double split = 0.9;
  bool grayscale = false;
  prep->add_option("--src", src_dir, "source image directory")->required();
  prep->add_option("--crop", crop, "crop size (default 64)");
  prep->add_option("--split", split, "train fraction (default 0.9)");
  prep->add_flag("--grayscale", grayscale, "convert crops to luma");

  // build-stego
  auto* bstego = app.add_subcommand(
      "build-stego", "embed random bits into every cover of a manifest");
  bstego->fallthrough();
  std::string manifest_path, key_policy = "per-image";
  double payload = 0.4;
  bstego->add_option("--manifest", manifest_path, "cover manifest")
      ->required();
  bstego->add_option("--payload", payload, "bits per pixel (default 0.4)");
  bstego->add_option("--key-policy", key_policy, "per-image | fixed")
      ->check(CLI::IsMember({"per-image", "fixed"}));

  // train-ssgan
  auto* tssgan = app.add_subcommand(
      "train-ssgan", "run the three-player game over a cover manifest");
  tssgan->fallthrough();
  std::string data_manifest;
  bool desk = false;
  tssgan->add_option("--data", data_manifest, "training cover manifest")
      ->required();
  tssgan->add_flag("--desk", desk, "shrink widths to the desk preset");

  // train-detector
  auto* tdet = app.add_subcommand(
      "train-detector", "train a standalone steganalyser on a labeled corpus");
  tdet->fallthrough();
  std::string det_arch = "s", det_corpus;
  int det_epochs = 10;
  double det_lr = 0.0;
  bool det_desk = false;
  tdet->add_option("--corpus", det_corpus, "labeled corpus manifest")
      ->required();
  tdet->add_option("--arch", det_arch, "s | s-star")
      ->check(CLI::IsMember({"s", "s-star"}));
  tdet->add_option("--epochs", det_epochs, "training epochs (default 10)");
  tdet->add_option("--lr", det_lr, "override the preset learning rate");
  tdet->add_flag("--desk", det_desk, "shrink widths to the desk preset");

  // evaluate
  auto* eval = app.add_subcommand(
      "evaluate", "accuracy of a detector checkpoint over a corpus");
  eval->fallthrough();
  std::string eval_det, eval_corpus, run_id = "eval";
  eval->add_option("--detector", eval_det, "detector checkpoint")->required();
  eval->add_option("--corpus", eval_corpus, "corpus manifest")->required();
  eval->add_option("--run-id", run_id, "row key in the results table");

  // generate
  auto* gen = app.add_subcommand(
      "generate", "sample images from a checkpointed generator");
  gen->fallthrough();
  std::string gen_ckpt;
  int gen_n = 64;
  gen->add_option("--checkpoint", gen_ckpt, "game checkpoint")->required();
  gen->add_option("--n", gen_n, "image count (default 64)");

  // embed
  auto* emb = app.add_subcommand("embed", "LSB-matching embed into one PNG");
  emb->fallthrough();
  std::string emb_in, emb_msg_file;
  uint64_t emb_key = 0;
  double emb_payload = 0.4;
  emb->add_option("--in", emb_in, "cover PNG")->required();
  emb->add_option("--key", emb_key, "stego key (64-bit)")->required();
  emb->add_option("--payload", emb_payload, "bits per pixel (default 0.4)");
  emb->add_option("--message-file", emb_msg_file,
                  "bytes to embed (defaults to seeded random bits)");

  // extract
  auto* ext = app.add_subcommand("extract", "recover bits from a stego PNG");
  ext->fallthrough();
  std::string ext_in;
  uint64_t ext_key = 0;
  double ext_payload = 0.4;
  ext->add_option("--in", ext_in, "stego PNG")->required();
  ext->add_option("--key", ext_key, "stego key (64-bit)")->required();
  ext->add_option("--payload", ext_payload, "bits per pixel (default 0.4)");

  // seed-experiments
  auto* sexp = app.add_subcommand(
      "seed-experiments", "the S1/S2/S3 generation-seed conditions");
  sexp->fallthrough();
  std::string sx_gan, sx_det, sx_covers;
  int sx_n = 500, sx_tune = 2;
  uint64_t sx_train_seed = 1, sx_eval_seed = 2;
  double sx_payload = 0.4;
  sexp->add_option("--checkpoint", sx_gan, "game checkpoint")->required();
  sexp->add_option("--detector", sx_det, "detector checkpoint")->required();
  sexp->add_option("--covers", sx_covers, "real-cover manifest for S3 tuning")
      ->required();
  sexp->add_option("--n", sx_n, "covers per condition (default 500)");
  sexp->add_option("--train-seed", sx_train_seed,
                   "generation seed the detector was trained on");
  sexp->add_option("--eval-seed", sx_eval_seed, "fresh seed for S2/S3");
  sexp->add_option("--tune-epochs", sx_tune,
                   "extra generator epochs for S3 (default 2)");
  sexp->add_option("--payload", sx_payload, "bits per pixel (default 0.4)");

  // timing-report
  auto* timing = app.add_subcommand(
      "timing-report", "aggregate a per-batch timing log");
  timing->fallthrough();
  std::string timing_csv;
  bool with_reference = false;
  timing->add_option("--timing", timing_csv, "timing.csv from a run")
      ->required();
  timing->add_flag("--reference", with_reference,
                   "append the published reference totals");

  // synth-data
  auto* synth = app.add_subcommand(
      "synth-data", "deterministic synthetic corpora for experiments");
  synth->fallthrough();
  std::string synth_kind = "photo";
  int synth_n = 100, synth_size = 64, synth_channels = 3;
  synth->add_option("--kind", synth_kind, "photo | two-mode")
      ->check(CLI::IsMember({"photo", "two-mode"}));
  synth->add_option("--n", synth_n, "image count");
  synth->add_option("--size", synth_size, "image side length");
  synth->add_option("--channels", synth_channels, "1 or 3");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  int threads = 1;
  if (const char* env = std::getenv("STEGLAB_THREADS")) threads = std::atoi(env);
  set_blas_threads(threads);

  if (prep->parsed()) {
    const auto [train, test] =
        prepare_dataset(src_dir, out_dir, crop, split, seed, grayscale);
    std::cout << "train " << train.entries.size() << " images, test "
              << test.entries.size() << " images under " << out_dir << "\n";
  } else if (bstego->parsed()) {
    const CorpusManifest covers = load_manifest(manifest_path);
    const KeyPolicy policy = key_policy == "fixed" ? KeyPolicy::fixed_key
                                                   : KeyPolicy::per_image_key;
    const CorpusManifest m =
        build_stego_corpus(covers, out_dir, payload, policy, seed);
    std::cout << m.entries.size() << " labeled entries in " << out_dir
              << "/corpus_manifest.json\n";
  } else if (tssgan->parsed()) {
    TrainingConfig cfg =
        config_path.empty() ? TrainingConfig{} : load_training_config(config_path);
    if (desk) {
      const TrainingConfig d = desk_config();
      cfg.g.base = d.g.base;
      cfg.d.base = d.d.base;
      cfg.s.widths = d.s.widths;
      cfg.s.fc_hidden = d.s.fc_hidden;
    }
    for (int i = 1; i < argc; ++i)
      if (std::string(argv[i]) == "--seed") cfg.master_seed = seed;
    const CorpusManifest covers = load_manifest(data_manifest);
    const TrainOutputs out = run_training(cfg, covers, out_dir);
    std::cout << "checkpoint " << out.checkpoint_path << "\nmetrics "
              << out.metrics_path << "\nlast d_accuracy "
              << format_double(out.reports.back().d_accuracy) << "\n";
  } else if (tdet->parsed()) {
    const CorpusManifest m = load_manifest(det_corpus);
    const LabeledImages corpus = load_corpus(m);
    DetectorPreset preset =
        detector_preset(det_arch, corpus.images.c, det_desk);
    if (det_lr > 0.0) preset.lr = det_lr;
    const DetectorResult res =
        train_detector(preset, corpus, det_epochs, seed);
    fs::create_directories(out_dir);
    const std::string ck = (fs::path(out_dir) / "detector.bin").string();
    save_checkpoint(res.checkpoint, ck);
    write_detector_history_csv(
        res.history, (fs::path(out_dir) / "detector_history.csv").string());
    std::cout << "detector " << ck << "\nfinal val_accuracy "
              << format_double(res.history.back().val_accuracy) << "\n";
  } else if (eval->parsed()) {
    const Checkpoint det = load_checkpoint(eval_det);
    const CorpusManifest m = load_manifest(eval_corpus);
    const LabeledImages corpus = load_corpus(m);
    const EvalReport r = evaluate_detector(det, corpus, eval_det, m.name);
    fs::create_directories(out_dir);
    append_results_csv((fs::path(out_dir) / "results.csv").string(), run_id,
                       {r});
    std::cout << "accuracy " << format_double(r.accuracy) << " fpr "
              << format_double(r.false_positive_rate) << " fnr "
              << format_double(r.false_negative_rate) << " n " << r.n_samples
              << "\n";
  } else if (gen->parsed()) {
    const Checkpoint ck = load_checkpoint(gen_ckpt);
    const std::vector<PixelImage> imgs = generate(ck, gen_n, seed);
    fs::create_directories(out_dir);
    char name[32];
    for (size_t i = 0; i < imgs.size(); ++i) {
      std::snprintf(name, sizeof name, "gen_%05zu.png", i);
      save_png(imgs[i], (fs::path(out_dir) / name).string());
    }
    if (!imgs.empty())
      save_png(montage(imgs, 8), (fs::path(out_dir) / "grid.png").string());
    std::cout << imgs.size() << " images under " << out_dir << "\n";
  } else if (emb->parsed()) {
    const PixelImage cover = load_png(emb_in);
    const size_t bits = capacity(cover, emb_payload);
    BitMessage msg;
    if (emb_msg_file.empty()) {
      Rng rng = Rng::stream(seed, rng_tag::messages);
      msg = random_bits(bits, rng);
    } else {
      msg = bytes_to_bits(read_bytes(emb_msg_file));
      if (msg.size() < bits)
        throw data_error("message file holds fewer bits than the capacity");
      msg.resize(bits);
    }
    const PixelImage stego = embed(cover, msg, StegoKey{emb_key});
    fs::create_directories(out_dir);
    const std::string dst =
        (fs::path(out_dir) / (fs::path(emb_in).stem().string() + "_stego.png"))
            .string();
    save_png(stego, dst);
    write_bytes((fs::path(out_dir) / "message.bin").string(),
                bits_to_bytes(msg));
    std::cout << "embedded " << bits << " bits -> " << dst << "\n";
  } else if (ext->parsed()) {
    const PixelImage stego = load_png(ext_in);
    const size_t bits = capacity(stego, ext_payload);
    const BitMessage msg = extract(stego, StegoKey{ext_key}, bits);
    fs::create_directories(out_dir);
    const std::string dst =
        (fs::path(out_dir) /
         (fs::path(ext_in).stem().string() + "_message.bin"))
            .string();
    write_bytes(dst, bits_to_bytes(msg));
    std::cout << "extracted " << bits << " bits -> " << dst << "\n";
  } else if (sexp->parsed()) {
    const Checkpoint gan = load_checkpoint(sx_gan);
    const Checkpoint det = load_checkpoint(sx_det);
    const CorpusManifest covers = load_manifest(sx_covers);
    SeedExperimentSpec spec;
    spec.n_images = sx_n;
    spec.train_seed = sx_train_seed;
    spec.eval_seed = sx_eval_seed;
    spec.tune_epochs = sx_tune;
    spec.payload = sx_payload;
    const auto reports = run_seed_experiments(gan, det, covers, spec, out_dir);
    for (const auto& r : reports)
      std::cout << r.corpus_id << " accuracy "
                << format_double(r.accuracy) << "\n";
  } else if (timing->parsed()) {
    fs::create_directories(out_dir);
    const auto rows = timing_report(
        timing_csv, (fs::path(out_dir) / "timing_report.csv").string(),
        with_reference);
    for (const auto& r : rows)
      std::cout << r.run << " epoch " << r.epoch << " batches " << r.batches
                << " total_seconds " << format_double(r.total_seconds)
                << "\n";
  } else if (synth->parsed()) {
    if (synth_kind == "photo")
      synth_photo_corpus(out_dir, synth_n, seed, synth_channels, synth_size);
    else
      synth_twomode_corpus(out_dir, synth_n, seed, synth_channels,
                           synth_size);
    std::cout << synth_n << " images under " << out_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
