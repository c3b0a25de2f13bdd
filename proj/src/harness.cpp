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

#include "steglab/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "steglab/errors.hpp"
#include "steglab/networks.hpp"
#include "steglab/nn.hpp"
#include "steglab/rng.hpp"

namespace steglab {

namespace fs = std::filesystem;
using nlohmann::json;

void save_manifest(const CorpusManifest& m, const std::string& path) {
  json j;
  j["name"] = m.name;
  j["split"] = m.split;
  j["payload"] = m.payload;
  j["key_policy"] = m.key_policy;
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back(
        {{"path", e.path}, {"label", e.label}, {"provenance", e.provenance}});
  j["entries"] = std::move(entries);
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw data_error("cannot write manifest: " + path);
  os << j.dump(2) << "\n";
  if (!os.flush()) throw data_error("manifest write failed: " + path);
}

CorpusManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw data_error("cannot open manifest: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw data_error("manifest is not valid JSON: " + std::string(e.what()));
  }
  CorpusManifest m;
  try {
    m.name = j.value("name", std::string());
    m.split = j.value("split", std::string());
    m.payload = j.value("payload", 0.0);
    m.key_policy = j.value("key_policy", std::string("none"));
    for (const auto& e : j.at("entries")) {
      ManifestEntry me;
      me.path = e.at("path").get<std::string>();
      me.label = e.at("label").get<int>();
      if (me.label != 0 && me.label != 1)
        throw data_error("manifest label outside {0,1}");
      me.provenance = e.value("provenance", std::string());
      m.entries.push_back(std::move(me));
    }
  } catch (const json::exception& e) {
    throw data_error("manifest field missing or mistyped: " +
                     std::string(e.what()));
  }
  m.base_dir = fs::path(path).parent_path().string();
  return m;
}

namespace {

std::string resolve(const CorpusManifest& m, const std::string& rel) {
  const fs::path p(rel);
  if (p.is_absolute() || m.base_dir.empty()) return rel;
  return (fs::path(m.base_dir) / p).string();
}

std::string rel_to(const std::string& base, const fs::path& p) {
  return fs::relative(p, base).string();
}

}  // namespace

LabeledImages load_corpus(const CorpusManifest& m, int label_filter) {
  std::vector<PixelImage> imgs;
  std::vector<int> labels;
  for (const auto& e : m.entries) {
    if (label_filter >= 0 && e.label != label_filter) continue;
    imgs.push_back(load_png(resolve(m, e.path)));
    labels.push_back(e.label);
  }
  if (imgs.empty()) throw data_error("manifest selects no images");
  LabeledImages out;
  out.images = to_tensor(imgs);
  out.labels = std::move(labels);
  return out;
}

std::pair<CorpusManifest, CorpusManifest> prepare_dataset(
    const std::string& src_dir, const std::string& out_dir, int crop,
    double split, uint64_t seed, bool grayscale) {
  if (crop < 1) throw usage_error("crop size must be positive");
  if (!(split > 0.0 && split < 1.0))
    throw usage_error("split fraction must lie in (0,1)");
  if (!fs::is_directory(src_dir))
    throw data_error("not a directory: " + src_dir);

  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(src_dir))
    if (de.is_regular_file()) files.push_back(de.path());
  std::sort(files.begin(), files.end());

  std::vector<std::pair<std::string, PixelImage>> crops;
  for (const auto& f : files) {
    PixelImage img;
    try {
      img = load_png(f.string());
    } catch (const data_error&) {
      continue;  // not a PNG; skip
    }
    if (img.width < crop || img.height < crop) continue;
    PixelImage cropped = center_crop(img, crop);
    if (grayscale) cropped = to_grayscale(cropped);
    crops.emplace_back(f.stem().string(), std::move(cropped));
  }
  if (crops.empty()) throw data_error("no decodable images in " + src_dir);

  const size_t n = crops.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng = Rng::stream(seed, rng_tag::split);
  rng.shuffle(order);
  // Floor the test share. Computed via the train side so that binary
  // artifacts of (1 - split) cannot shave an image off an exact multiple
  // (100 * (1 - 0.9) evaluates below 10).
  const size_t n_train = static_cast<size_t>(
      std::ceil(static_cast<double>(n) * split - 1e-9));
  const size_t n_test = n - std::min(n, n_train);

  fs::create_directories(fs::path(out_dir) / "train");
  fs::create_directories(fs::path(out_dir) / "test");
  CorpusManifest train, test;
  train.name = "train";
  train.split = "train";
  test.name = "test";
  test.split = "test";
  train.key_policy = test.key_policy = "none";
  train.base_dir = test.base_dir = out_dir;
  for (size_t k = 0; k < n; ++k) {
    const bool is_test = k < n_test;
    const auto& [stem, img] = crops[order[k]];
    const fs::path dst = fs::path(out_dir) / (is_test ? "test" : "train") /
                         (stem + ".png");
    save_png(img, dst.string());
    ManifestEntry e{rel_to(out_dir, dst), 0, "real"};
    (is_test ? test : train).entries.push_back(std::move(e));
  }
  save_manifest(train, (fs::path(out_dir) / "train_manifest.json").string());
  save_manifest(test, (fs::path(out_dir) / "test_manifest.json").string());
  return {train, test};
}

CorpusManifest build_stego_corpus(const CorpusManifest& covers,
                                  const std::string& out_dir, double payload,
                                  KeyPolicy policy, uint64_t seed) {
  fs::create_directories(fs::path(out_dir) / "stego");
  Rng rng = Rng::stream(seed, rng_tag::stego);
  StegoKey fixed{rng.next_u64()};
  CorpusManifest out;
  out.name = covers.name + "+stego";
  out.split = covers.split;
  out.payload = payload;
  out.key_policy = policy == KeyPolicy::fixed_key ? "fixed" : "per-image";
  out.base_dir = out_dir;
  for (const auto& e : covers.entries) {
    if (e.label != 0) continue;
    const std::string cover_path = resolve(covers, e.path);
    const PixelImage cover = load_png(cover_path);
    const size_t bits = capacity(cover, payload);
    const BitMessage msg = random_bits(bits, rng);
    const StegoKey key =
        policy == KeyPolicy::fixed_key ? fixed : StegoKey{rng.next_u64()};
    const PixelImage stego = embed(cover, msg, key);
    const fs::path dst = fs::path(out_dir) / "stego" /
                         (fs::path(e.path).stem().string() + ".png");
    save_png(stego, dst.string());
    out.entries.push_back(
        {rel_to(out_dir, fs::absolute(cover_path)), 0, e.provenance});
    out.entries.push_back({rel_to(out_dir, dst), 1, "stego"});
  }
  if (out.entries.empty()) throw data_error("manifest holds no covers");
  save_manifest(out, (fs::path(out_dir) / "corpus_manifest.json").string());
  return out;
}

CorpusManifest build_generated_corpus(const Checkpoint& gan, int n,
                                      uint64_t seed, double payload,
                                      KeyPolicy policy,
                                      const std::string& out_dir) {
  if (n < 1) throw usage_error("need at least one generated image");
  fs::create_directories(fs::path(out_dir) / "cover");
  fs::create_directories(fs::path(out_dir) / "stego");
  const std::vector<PixelImage> covers = generate(gan, n, seed);
  Rng rng = Rng::stream(seed, rng_tag::messages);
  StegoKey fixed{rng.next_u64()};
  CorpusManifest m;
  m.name = "generated-" + std::to_string(seed);
  m.split = "mixed";
  m.payload = payload;
  m.key_policy = policy == KeyPolicy::fixed_key ? "fixed" : "per-image";
  m.base_dir = out_dir;
  const std::string prov = "generated(seed=" + std::to_string(seed) + ")";
  char name[32];
  for (int i = 0; i < n; ++i) {
    std::snprintf(name, sizeof name, "%05d.png", i);
    const fs::path cpath = fs::path(out_dir) / "cover" / name;
    save_png(covers[static_cast<size_t>(i)], cpath.string());
    const size_t bits = capacity(covers[static_cast<size_t>(i)], payload);
    const BitMessage msg = random_bits(bits, rng);
    const StegoKey key =
        policy == KeyPolicy::fixed_key ? fixed : StegoKey{rng.next_u64()};
    const PixelImage stego = embed(covers[static_cast<size_t>(i)], msg, key);
    const fs::path spath = fs::path(out_dir) / "stego" / name;
    save_png(stego, spath.string());
    m.entries.push_back({rel_to(out_dir, cpath), 0, prov});
    m.entries.push_back({rel_to(out_dir, spath), 1, prov});
  }
  save_manifest(m, (fs::path(out_dir) / "corpus_manifest.json").string());
  return m;
}

DetectorPreset detector_preset(const std::string& name, int img_channels,
                               bool desk) {
  DetectorPreset p;
  p.name = name;
  p.arch.img_channels = img_channels;
  if (name == "s") {
    p.lr = 2e-4;
    p.beta1 = 0.5;
  } else if (name == "s-star") {
    p.arch.nonlin = DetNonlin::gaussian;
    p.lr = 5e-6;
    p.beta1 = 0.9;
  } else {
    throw usage_error("unknown detector preset: " + name);
  }
  if (desk) {
    p.arch.widths = {8, 16, 32, 64};
    p.arch.fc_hidden = 128;
  }
  return p;
}

namespace {

std::string det_meta_json(const DetectorPreset& preset) {
  json j;
  j["detector"] = {
      {"name", preset.name},
      {"widths", std::vector<int>(preset.arch.widths.begin(),
                                  preset.arch.widths.end())},
      {"fc_hidden", preset.arch.fc_hidden},
      {"nonlin", preset.arch.nonlin == DetNonlin::leaky_relu ? "leaky-relu"
                                                             : "gaussian"},
      {"img_channels", preset.arch.img_channels},
      {"img_size", preset.arch.img_size},
      {"lr", preset.lr},
      {"beta1", preset.beta1},
      {"beta2", preset.beta2},
  };
  return j.dump(2) + "\n";
}

DetArch det_arch_from_meta(const std::string& meta) {
  json j;
  try {
    j = json::parse(meta);
    const json d = j.at("detector");
    DetArch a;
    const auto w = d.at("widths").get<std::vector<int>>();
    if (w.size() != 4) throw data_error("detector meta widths malformed");
    std::copy(w.begin(), w.end(), a.widths.begin());
    a.fc_hidden = d.at("fc_hidden").get<int>();
    a.nonlin = d.at("nonlin").get<std::string>() == "gaussian"
                   ? DetNonlin::gaussian
                   : DetNonlin::leaky_relu;
    a.img_channels = d.at("img_channels").get<int>();
    a.img_size = d.at("img_size").get<int>();
    return a;
  } catch (const json::exception& e) {
    throw data_error("detector checkpoint meta malformed: " +
                     std::string(e.what()));
  }
}

Tensor4 slice_rows(const Tensor4& all, const std::vector<size_t>& idx,
                   size_t from, size_t count) {
  Tensor4 out(static_cast<int>(count), all.c, all.h, all.w);
  const size_t img = static_cast<size_t>(all.c) * all.h * all.w;
  for (size_t i = 0; i < count; ++i)
    std::memcpy(&out.v[i * img], &all.v[idx[from + i] * img],
                img * sizeof(double));
  return out;
}

double detector_accuracy(const DetArch& arch, ParamStore& params,
                         const Tensor4& images, const std::vector<int>& labels,
                         const std::vector<size_t>& idx) {
  int correct = 0;
  const int B = 64;
  for (size_t at = 0; at < idx.size(); at += B) {
    const size_t nb = std::min<size_t>(B, idx.size() - at);
    const Tensor4 batch = slice_rows(images, idx, at, nb);
    const Tensor4 probs = forward_s(arch, params, batch, nullptr);
    for (size_t i = 0; i < nb; ++i) {
      const int pred = probs.v[i * 2 + 1] > 0.5 ? 1 : 0;
      correct += pred == labels[idx[at + i]];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

}  // namespace

DetectorResult train_detector(const DetectorPreset& preset,
                              const LabeledImages& corpus, int epochs,
                              uint64_t seed) {
  if (epochs < 1) throw usage_error("epochs must be >= 1");
  const size_t n = corpus.labels.size();
  bool has0 = false, has1 = false;
  for (int l : corpus.labels) (l == 0 ? has0 : has1) = true;
  if (!has0 || !has1)
    throw usage_error("detector training needs both classes in the corpus");

  ParamStore params;
  Rng init = Rng::stream(seed, rng_tag::init_s);
  build_steganalyser(preset.arch, params, init);
  OptimState opt(
      OptimConfig{OptimMode::rmsprop_momentum, preset.lr, preset.beta1,
                  preset.beta2, 1e-8});

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng split_rng = Rng::stream(seed, rng_tag::split);
  split_rng.shuffle(idx);
  const size_t n_val = std::max<size_t>(1, n / 10);
  std::vector<size_t> val(idx.begin(), idx.begin() + n_val);
  std::vector<size_t> train(idx.begin() + n_val, idx.end());
  if (train.empty()) throw usage_error("corpus too small to split");

  Rng order_rng = Rng::stream(seed, rng_tag::data_order);
  DetectorResult res;
  const int B = 64;
  for (int e = 0; e < epochs; ++e) {
    order_rng.shuffle(train);
    double loss_sum = 0;
    int correct = 0;
    for (size_t at = 0; at < train.size(); at += B) {
      const size_t nb = std::min<size_t>(B, train.size() - at);
      const Tensor4 batch = slice_rows(corpus.images, train, at, nb);
      std::vector<double> label(nb);
      for (size_t i = 0; i < nb; ++i)
        label[i] = corpus.labels[train[at + i]];
      params.zero_grads();
      DetCache cache;
      const Tensor4 probs = forward_s(preset.arch, params, batch, &cache);
      std::vector<double> p1(nb);
      for (size_t i = 0; i < nb; ++i) p1[i] = probs.v[i * 2 + 1];
      loss_sum += bce_loss(p1, label) * static_cast<double>(nb);
      const std::vector<double> g = bce_loss_backward(p1, label);
      Tensor4 dprobs(static_cast<int>(nb), 2, 1, 1);
      for (size_t i = 0; i < nb; ++i) dprobs.v[i * 2 + 1] = g[i];
      backward_s(preset.arch, params, cache, dprobs, true, false);
      optim_step(params, opt);
      for (size_t i = 0; i < nb; ++i)
        correct += (p1[i] > 0.5 ? 1 : 0) == corpus.labels[train[at + i]];
    }
    DetectorEpochRow row;
    row.epoch = e;
    row.train_loss = loss_sum / static_cast<double>(train.size());
    row.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(train.size());
    row.val_accuracy =
        detector_accuracy(preset.arch, params, corpus.images,
                          corpus.labels, val);
    res.history.push_back(row);
  }
  res.checkpoint.master_seed = seed;
  res.checkpoint.meta_json = det_meta_json(preset);
  res.checkpoint.sections.push_back({"s", std::move(params), std::move(opt)});
  return res;
}

void write_detector_history_csv(const std::vector<DetectorEpochRow>& rows,
                                const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw data_error("cannot write history csv: " + path);
  os << "epoch,train_loss,train_accuracy,val_accuracy\n";
  for (const auto& r : rows)
    os << r.epoch << ',' << format_double(r.train_loss) << ','
       << format_double(r.train_accuracy) << ','
       << format_double(r.val_accuracy) << '\n';
  if (!os.flush()) throw data_error("history csv write failed: " + path);
}

EvalReport evaluate_detector(const Checkpoint& det,
                             const LabeledImages& corpus,
                             const std::string& detector_id,
                             const std::string& corpus_id) {
  const auto t0 = std::chrono::steady_clock::now();
  const DetArch arch = det_arch_from_meta(det.meta_json);
  const ParamStore* sp = nullptr;
  for (const auto& sec : det.sections)
    if (sec.name == "s") sp = &sec.params;
  if (!sp) throw data_error("detector checkpoint lacks an s section");
  ParamStore params = *sp;

  const size_t n = corpus.labels.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  int tp = 0, tn = 0, fp = 0, fn = 0;
  const int B = 64;
  for (size_t at = 0; at < n; at += B) {
    const size_t nb = std::min<size_t>(B, n - at);
    const Tensor4 batch = slice_rows(corpus.images, idx, at, nb);
    const Tensor4 probs = forward_s(arch, params, batch, nullptr);
    for (size_t i = 0; i < nb; ++i) {
      const int pred = probs.v[i * 2 + 1] > 0.5 ? 1 : 0;
      const int truth = corpus.labels[at + i];
      if (truth == 1)
        (pred == 1 ? tp : fn)++;
      else
        (pred == 0 ? tn : fp)++;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  EvalReport r;
  r.detector_id = detector_id;
  r.corpus_id = corpus_id;
  r.n_samples = static_cast<int>(n);
  r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(n);
  r.false_positive_rate =
      tn + fp > 0 ? static_cast<double>(fp) / (tn + fp) : 0.0;
  r.false_negative_rate =
      tp + fn > 0 ? static_cast<double>(fn) / (tp + fn) : 0.0;
  r.wall_time = std::chrono::duration<double>(t1 - t0).count();
  return r;
}

void append_results_csv(const std::string& path, const std::string& run_id,
                        const std::vector<EvalReport>& reports) {
  const bool fresh = !fs::exists(path);
  std::ofstream os(path, std::ios::app);
  if (!os) throw data_error("cannot write results csv: " + path);
  if (fresh)
    os << "run_id,detector_id,corpus_id,accuracy,false_positive_rate,"
          "false_negative_rate,n_samples,wall_time\n";
  for (const auto& r : reports)
    os << run_id << ',' << r.detector_id << ',' << r.corpus_id << ','
       << format_double(r.accuracy) << ','
       << format_double(r.false_positive_rate) << ','
       << format_double(r.false_negative_rate) << ',' << r.n_samples << ','
       << format_double(r.wall_time) << '\n';
  if (!os.flush()) throw data_error("results csv write failed: " + path);
}

std::vector<EvalReport> run_seed_experiments(
    const Checkpoint& gan, const Checkpoint& det,
    const CorpusManifest& covers_for_tuning, const SeedExperimentSpec& spec,
    const std::string& out_dir) {
  if (spec.n_images < 1) throw usage_error("need at least one image");
  fs::create_directories(out_dir);
  std::vector<EvalReport> out;

  const auto eval_on = [&](const CorpusManifest& m, const std::string& id) {
    const LabeledImages corpus = load_corpus(m);
    out.push_back(evaluate_detector(det, corpus, "detector", id));
  };

  // S1: the same generation seed the detector's corpus was built from.
  eval_on(build_generated_corpus(gan, spec.n_images, spec.train_seed,
                                 spec.payload, KeyPolicy::per_image_key,
                                 (fs::path(out_dir) / "s1").string()),
          "S1");
  // S2: a fresh seed through the same generator.
  eval_on(build_generated_corpus(gan, spec.n_images, spec.eval_seed,
                                 spec.payload, KeyPolicy::per_image_key,
                                 (fs::path(out_dir) / "s2").string()),
          "S2");
  // S3: tune the game further on real covers, then a fresh seed again.
  TrainingConfig cfg = training_config_from_json(gan.meta_json);
  cfg.epochs = spec.tune_epochs;
  SsganGame game(cfg, gan, spec.eval_seed + 1);
  const LabeledImages covers = load_corpus(covers_for_tuning, 0);
  for (int e = 0; e < spec.tune_epochs; ++e) game.train_epoch(covers.images, e);
  const Checkpoint tuned = game.to_checkpoint();
  eval_on(build_generated_corpus(tuned, spec.n_images, spec.eval_seed + 2,
                                 spec.payload, KeyPolicy::per_image_key,
                                 (fs::path(out_dir) / "s3").string()),
          "S3");
  append_results_csv((fs::path(out_dir) / "results.csv").string(),
                     "seed-experiments", out);
  return out;
}

std::vector<TimingRow> timing_report(const std::string& timing_csv,
                                     const std::string& out_csv,
                                     bool with_reference) {
  std::ifstream is(timing_csv);
  if (!is) throw data_error("cannot open timing log: " + timing_csv);
  std::string line;
  std::vector<TimingRow> rows;
  bool first = true;
  std::map<int, std::pair<int, double>> per_epoch;  // epoch -> (count, sum)
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find("wall_seconds") == std::string::npos)
        throw data_error("timing log lacks a wall_seconds column");
      continue;
    }
    std::istringstream ss(line);
    std::string epoch_s, batch_s, wall_s;
    if (!std::getline(ss, epoch_s, ',') || !std::getline(ss, batch_s, ',') ||
        !std::getline(ss, wall_s))
      throw data_error("timing log row malformed: " + line);
    try {
      const int epoch = std::stoi(epoch_s);
      const double wall = std::stod(wall_s);
      auto& [count, sum] = per_epoch[epoch];
      ++count;
      sum += wall;
    } catch (const std::exception&) {
      throw data_error("timing log row malformed: " + line);
    }
  }
  double grand = 0;
  int total_batches = 0;
  for (const auto& [epoch, cs] : per_epoch) {
    rows.push_back({"run", epoch, cs.first, cs.second});
    grand += cs.second;
    total_batches += cs.first;
  }
  if (!per_epoch.empty())
    rows.push_back({"run-total", -1, total_batches, grand});
  if (with_reference && !per_epoch.empty()) {
    rows.push_back({"reference-sgan", -1, 0, kReferenceSganMinutes * 60.0});
    rows.push_back({"reference-ssgan", -1, 0, kReferenceSsganMinutes * 60.0});
  }
  std::ofstream os(out_csv, std::ios::trunc);
  if (!os) throw data_error("cannot write timing report: " + out_csv);
  os << "run,epoch,batches,total_seconds\n";
  for (const auto& r : rows)
    os << r.run << ',' << r.epoch << ',' << r.batches << ','
       << format_double(r.total_seconds) << '\n';
  if (!os.flush()) throw data_error("timing report write failed: " + out_csv);
  return rows;
}

namespace {

PixelImage quantize_plane(const std::vector<double>& plane, int size,
                          int channels) {
  PixelImage img;
  img.width = size;
  img.height = size;
  img.channels = channels;
  img.data.resize(static_cast<size_t>(size) * size * channels);
  for (size_t i = 0; i < plane.size(); ++i) {
    double v = plane[i];
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    img.data[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  return img;
}

}  // namespace

void synth_photo_corpus(const std::string& out_dir, int n, uint64_t seed,
                        int channels, int size) {
  if (n < 1 || size < 8) throw usage_error("bad corpus parameters");
  if (channels != 1 && channels != 3)
    throw usage_error("channels must be 1 or 3");
  fs::create_directories(out_dir);
  Rng rng(seed);
  constexpr double kTau = 6.283185307179586;
  char name[32];
  for (int i = 0; i < n; ++i) {
    // A few low-frequency waves plus a soft radial blob: smooth content
    // whose high-pass residual is essentially zero.
    struct Wave {
      double u, v, phase, amp;
    };
    Wave waves[4];
    for (auto& w : waves) {
      w.u = (rng.uniform_sym() * 3.0) / size;
      w.v = (rng.uniform_sym() * 3.0) / size;
      w.phase = rng.uniform() * kTau;
      w.amp = 0.1 + 0.15 * rng.uniform();
    }
    const double cx = size * (0.25 + 0.5 * rng.uniform());
    const double cy = size * (0.25 + 0.5 * rng.uniform());
    const double rad = size * (0.2 + 0.3 * rng.uniform());
    const double blob_amp = 0.15 + 0.2 * rng.uniform();
    const double base = 0.35 + 0.3 * rng.uniform();
    std::array<double, 3> tint{1.0, 1.0, 1.0};
    if (channels == 3)
      for (auto& t : tint) t = 0.85 + 0.3 * rng.uniform();

    std::vector<double> plane(static_cast<size_t>(size) * size * channels);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double v = base;
        for (const auto& w : waves)
          v += w.amp * std::cos(kTau * (w.u * x + w.v * y) + w.phase);
        const double dx = x - cx, dy = y - cy;
        v += blob_amp * std::exp(-(dx * dx + dy * dy) / (2.0 * rad * rad));
        for (int c = 0; c < channels; ++c)
          plane[(static_cast<size_t>(y) * size + x) * channels + c] =
              v * tint[static_cast<size_t>(c)];
      }
    std::snprintf(name, sizeof name, "photo_%05d.png", i);
    save_png(quantize_plane(plane, size, channels),
             (fs::path(out_dir) / name).string());
  }
}

void synth_twomode_corpus(const std::string& out_dir, int n, uint64_t seed,
                          int channels, int size) {
  if (n < 1 || size % 8 != 0) throw usage_error("size must be a multiple of 8");
  if (channels != 1 && channels != 3)
    throw usage_error("channels must be 1 or 3");
  fs::create_directories(out_dir);
  Rng rng(seed);
  const int cell = size / 8;
  char name[32];
  for (int i = 0; i < n; ++i) {
    const bool vertical = rng.coin();
    const double lo = 0.2 + 0.05 * rng.uniform_sym();
    const double hi = 0.8 + 0.05 * rng.uniform_sym();
    std::vector<double> plane(static_cast<size_t>(size) * size * channels);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const int k = (vertical ? x : y) / cell;
        const double v = (k % 2 == 0) ? lo : hi;
        for (int c = 0; c < channels; ++c)
          plane[(static_cast<size_t>(y) * size + x) * channels + c] = v;
      }
    std::snprintf(name, sizeof name, "mode_%05d.png", i);
    save_png(quantize_plane(plane, size, channels),
             (fs::path(out_dir) / name).string());
  }
}

PixelImage montage(const std::vector<PixelImage>& imgs, int cols) {
  if (imgs.empty() || cols < 1) throw usage_error("nothing to tile");
  const int w = imgs[0].width, h = imgs[0].height, c = imgs[0].channels;
  for (const auto& im : imgs)
    if (im.width != w || im.height != h || im.channels != c)
      throw usage_error("montage images must share one shape");
  const int rows = (static_cast<int>(imgs.size()) + cols - 1) / cols;
  PixelImage out;
  out.width = w * cols;
  out.height = h * rows;
  out.channels = c;
  out.data.assign(static_cast<size_t>(out.width) * out.height * c, 0);
  for (size_t k = 0; k < imgs.size(); ++k) {
    const int r0 = static_cast<int>(k) / cols * h;
    const int c0 = static_cast<int>(k) % cols * w;
    for (int y = 0; y < h; ++y)
      std::memcpy(&out.data[((static_cast<size_t>(r0) + y) * out.width + c0) *
                            c],
                  &imgs[k].data[static_cast<size_t>(y) * w * c],
                  static_cast<size_t>(w) * c);
  }
  return out;
}

TrainOutputs run_training(const TrainingConfig& cfg,
                          const CorpusManifest& covers,
                          const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const LabeledImages data = load_corpus(covers, 0);
  SsganGame game(cfg);
  TrainOutputs out;
  for (int e = 0; e < cfg.epochs; ++e) {
    auto reports = game.train_epoch(data.images, e);
    out.reports.insert(out.reports.end(), reports.begin(), reports.end());
  }
  const Checkpoint ck = game.to_checkpoint();
  out.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
  save_checkpoint(ck, out.checkpoint_path);
  out.metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  write_metrics_csv(out.reports, out.metrics_path);
  out.timing_path = (fs::path(out_dir) / "timing.csv").string();
  write_timing_csv(out.reports, out.timing_path);
  const std::vector<PixelImage> samples =
      generate(ck, 64, cfg.master_seed);
  out.samples_path = (fs::path(out_dir) / "samples.png").string();
  save_png(montage(samples, 8), out.samples_path);
  return out;
}

}  // namespace steglab
