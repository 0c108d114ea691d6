/**
 * Copyright 2026 The sslines Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// sslines command-line tool. Exit codes: 0 success, 1 usage or config
// error, 2 data error, 3 runtime failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sslines/checkpoint.hpp"
#include "sslines/config.hpp"
#include "sslines/data.hpp"
#include "sslines/evaluate.hpp"
#include "sslines/image.hpp"
#include "sslines/train.hpp"

namespace fs = std::filesystem;
using namespace sslines;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flags shared by the commands that consume a run config. Precedence:
// profile defaults, then the config file, then explicit flags.
struct ConfigFlags {
  std::string config_path;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--profile", profile, "Profile defaults")->check(CLI::IsMember({"desk", "reference"}));
    cmd->add_option("--seed", seed, "Overrides train.seed");
    cmd->add_option("--threads", threads, "Overrides train.threads");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig::for_profile(profile.empty() ? "desk" : profile)
                                      : load_run_config(config_path, profile);
    if (seed) c.train.seed = *seed;
    if (threads) c.train.threads = *threads;
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------

struct MakeSplitsArgs {
  std::string manifest;
  std::string fractions = "1/16,1/8,1/4,1/2";
  std::uint64_t seed = 0;
  std::string out;
};

int run_make_splits(const MakeSplitsArgs& a) {
  std::vector<SplitFraction> fractions;
  try {
    for (const auto& f : split_list(a.fractions)) fractions.push_back(parse_fraction(f));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  if (fractions.empty()) throw ConfigError("--fractions is empty");
  const auto loaded = load_manifest(a.manifest);
  for (const auto& f : fractions) {
    const SplitSpec split = make_split(loaded.manifest, f, a.seed);
    const std::string name = "split_" + (f.denominator == 1 ? std::string("1") : "1-" + std::to_string(f.denominator));
    write_text(fs::path(a.out) / (name + ".json"), serialize_split(split));
    std::cout << name << ".json: " << split.labeled_ids.size() << " labeled, " << split.unlabeled_ids.size()
              << " unlabeled\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  int n = 500;
  int size = 128;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  if (a.n < 1) throw ConfigError("--n must be at least 1");
  if (a.size < 16) throw ConfigError("--size must be at least 16");
  const auto data = synth_line_dataset(a.n, a.size, a.seed);
  write_synth_dataset(data, a.out);
  std::cout << "wrote " << a.n << " images to " << a.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  ConfigFlags cfg;
  std::string stage = "supervised";
  std::string out;
  std::string warm;
  std::string cutmix;
  std::optional<bool> dual_strong;
  std::optional<int> epochs;
  std::optional<int> max_steps;
};

struct TrainData {
  std::vector<LabeledItem> labeled;
  std::vector<Image> unlabeled;
  std::vector<LabeledItem> val;
};

// The validation set is carved from the train manifest first; split ids that
// land in it are dropped from the labeled and unlabeled lists.
TrainData assemble_data(const RunConfig& c) {
  if (c.data.train_manifest.empty()) throw ConfigError("data.train_manifest is not set");
  const DatasetManifest train = load_manifest(c.data.train_manifest).manifest;
  const int val_count = std::min<int>(c.data.val_count, static_cast<int>(train.samples.size()) - 1);
  auto [rest, val] = carve_validation(train, std::max(0, val_count), c.train.seed);

  std::vector<std::string> labeled_ids, unlabeled_ids;
  if (c.data.split.empty()) {
    for (const auto& s : rest.samples) (s.labeled() ? labeled_ids : unlabeled_ids).push_back(s.image_id);
  } else {
    const SplitSpec split = load_split(c.data.split);
    auto keep = [&](const std::vector<std::string>& ids) {
      std::vector<std::string> out;
      for (const auto& id : ids) {
        if (rest.find(id)) out.push_back(id);
        else if (!val.find(id)) throw DataError("split id '" + id + "' is not in the train manifest");
      }
      return out;
    };
    labeled_ids = keep(split.labeled_ids);
    unlabeled_ids = keep(split.unlabeled_ids);
  }
  const int size = c.model.input_size;
  TrainData d;
  d.labeled = load_labeled_items(subset(rest, labeled_ids, ManifestRole::kTrain), size);
  d.unlabeled = load_images(subset(rest, unlabeled_ids, ManifestRole::kTrain), size);
  std::vector<std::string> val_ids;
  for (const auto& s : val.samples) val_ids.push_back(s.image_id);
  d.val = load_labeled_items(subset(val, val_ids, ManifestRole::kVal), size);
  return d;
}

int run_train(const TrainArgs& a) {
  RunConfig c = a.cfg.resolve();
  if (!a.cutmix.empty()) c.train.cutmix = parse_cutmix_mode(a.cutmix);
  if (a.dual_strong) c.train.dual_strong = *a.dual_strong;
  if (a.epochs) (a.stage == "semi" ? c.train.epochs_semi : c.train.epochs_supervised) = *a.epochs;
  if (a.max_steps) c.train.max_steps = *a.max_steps;
  if (!a.warm.empty()) c.data.warm_checkpoint = a.warm;
  c.validate();

  Checkpoint warm;
  if (a.stage == "semi") {
    if (c.data.warm_checkpoint.empty()) {
      throw ConfigError("the semi stage needs a warm checkpoint (--warm or data.warm_checkpoint)");
    }
    warm = load_checkpoint(c.data.warm_checkpoint);
  }
  const TrainData d = assemble_data(c);

  const fs::path out(a.out);
  fs::create_directories(out);
  write_text(out / "config.json", c.to_json());
  std::ofstream log(out / "train_log.jsonl", std::ios::binary);
  TrainHooks hooks;
  hooks.log = &log;
  hooks.on_epoch = [](const EpochRecord& r) {
    std::cerr << r.stage << " epoch " << r.epoch << " loss " << r.losses.at("total");
    if (r.validated) std::cerr << " val sAP10 " << r.val_sap10;
    std::cerr << "\n";
  };

  TrainResult result;
  if (a.stage == "semi") {
    LineModel model(c.model, c.train.seed);
    load_parameters(model, warm.params);
    result = train_semi(model, d.labeled, d.unlabeled, d.val, c, hooks);
  } else {
    LineModel model(c.model, c.train.seed);
    result = train_supervised(model, d.labeled, d.val, c, hooks);
  }
  save_checkpoint(result.best, out / "best.ckpt");
  save_checkpoint(result.last, out / "last.ckpt");
  std::cout << "best epoch " << result.best.epoch << ", checkpoints in " << out.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  ConfigFlags cfg;
  std::string checkpoint;
  std::string manifest;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (!a.cfg.config_path.empty()) {
    const RunConfig c = a.cfg.resolve();
    ckpt.config.train.decode = c.train.decode;
    ckpt.config.train.metrics = c.train.metrics;
  }
  const auto loaded = load_manifest(a.manifest);
  const EvalReport report = evaluate_checkpoint(ckpt, loaded.manifest);
  const std::string text = report.to_json();
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
    write_text(fs::path(a.out).parent_path() / "config.json", ckpt.config.to_json());
    std::cout << "sAP10 " << report.sap.at(report.primary_k) << "  F^H " << report.f_h << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  ConfigFlags cfg;
  std::string checkpoint;
  std::string input;
  std::string out;
  bool overlay = false;
};

std::vector<fs::path> list_files(const fs::path& dir, const std::set<std::string>& extensions) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && extensions.count(e.path().extension().string())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int run_detect(const DetectArgs& a) {
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (!a.cfg.config_path.empty()) ckpt.config.train.decode = a.cfg.resolve().train.decode;
  const LineModel model = model_from_checkpoint(ckpt);
  const int size = ckpt.config.model.input_size;

  std::vector<fs::path> images;
  if (fs::is_directory(a.input)) images = list_files(a.input, {".ppm"});
  else if (fs::exists(a.input)) images.push_back(a.input);
  else throw DataError("input not found: " + a.input);

  const fs::path out(a.out);
  fs::create_directories(out);
  if (a.overlay) fs::create_directories(out / "overlays");
  nlohmann::ordered_json doc;
  doc["name"] = "detections";
  doc["role"] = "test";
  doc["samples"] = nlohmann::ordered_json::array();
  for (const auto& path : images) {
    const Image image = read_image(path);
    const Image input = (image.width() == size && image.height() == size) ? image : resize_image(image, size, size);
    auto lines = detect_lines(model.forward(input), ckpt.config.train.decode);
    const double sx = static_cast<double>(image.width()) / size;
    const double sy = static_cast<double>(image.height()) / size;
    nlohmann::ordered_json coords = nlohmann::ordered_json::array();
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    for (auto& l : lines) {
      l.start = {l.start.x * sx, l.start.y * sy};
      l.end = {l.end.x * sx, l.end.y * sy};
      coords.push_back({l.start.x, l.start.y, l.end.x, l.end.y});
      scores.push_back(l.score.value_or(0.0));
    }
    const std::string id = path.stem().string();
    doc["samples"].push_back({{"image_id", id},
                              {"image_path", fs::absolute(path).lexically_normal().string()},
                              {"width", image.width()},
                              {"height", image.height()},
                              {"lines", coords},
                              {"scores", scores}});
    if (a.overlay) {
      Image canvas = image;
      const float red[3] = {1.0f, 0.1f, 0.1f};
      draw_lines(canvas, lines, red);
      write_image(out / "overlays" / (id + ".ppm"), canvas);
    }
    std::cout << id << ": " << lines.size() << " lines\n";
  }
  write_text(out / "detections.json", doc.dump(2) + "\n");
  write_text(out / "config.json", ckpt.config.to_json());
  return kOk;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string masks;
  std::string out;
  MaskExtractParams params;
};

int run_extract_lines(const ExtractArgs& a) {
  if (!fs::is_directory(a.masks)) throw DataError("mask directory not found: " + a.masks);
  const auto files = list_files(a.masks, {".pgm"});
  if (files.empty()) std::cerr << "warning: no .pgm masks in " << a.masks << "\n";
  DatasetManifest m;
  m.name = fs::path(a.masks).filename().string();
  m.role = ManifestRole::kTrain;
  for (const auto& path : files) {
    const auto mask = read_mask(path);
    Sample s;
    s.image_id = path.stem().string();
    s.image_path = path.filename().string();
    s.width = mask.width();
    s.height = mask.height();
    s.lines = extract_lines_from_mask(mask, a.params);
    m.samples.push_back(std::move(s));
  }
  write_text(a.out, serialize_manifest(m));
  std::cout << "wrote " << m.samples.size() << " samples to " << a.out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised line segment detection toolkit"};
  app.require_subcommand(1);

  MakeSplitsArgs splits;
  auto* c_splits = app.add_subcommand("make-splits", "Write labeled/unlabeled split files");
  c_splits->add_option("--manifest", splits.manifest, "Train manifest")->required();
  c_splits->add_option("--fractions", splits.fractions, "Comma-separated fractions, e.g. 1/16,1/8");
  c_splits->add_option("--seed", splits.seed, "Shuffle seed");
  c_splits->add_option("--out", splits.out, "Output directory")->required();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic line dataset");
  c_synth->add_option("--n", synth.n, "Number of images");
  c_synth->add_option("--size", synth.size, "Image side in pixels");
  c_synth->add_option("--seed", synth.seed, "Generator seed");
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a model");
  train.cfg.attach(c_train);
  c_train->add_option("--stage", train.stage, "supervised or semi")->check(CLI::IsMember({"supervised", "semi"}));
  c_train->add_option("--out", train.out, "Run directory")->required();
  c_train->add_option("--warm", train.warm, "Warm checkpoint for the semi stage");
  c_train->add_option("--cutmix", train.cutmix, "off, axis or square");
  c_train->add_option("--dual-strong", train.dual_strong, "Use two strong views (true/false)");
  c_train->add_option("--epochs", train.epochs, "Epochs for the selected stage");
  c_train->add_option("--max-steps", train.max_steps, "Stop after this many steps");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled manifest");
  eval.cfg.attach(c_eval);
  c_eval->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
  c_eval->add_option("--manifest", eval.manifest, "Labeled manifest")->required();
  c_eval->add_option("--out", eval.out, "Report path (stdout if omitted)");

  DetectArgs detect;
  auto* c_detect = app.add_subcommand("detect", "Detect lines in an image or a directory of images");
  detect.cfg.attach(c_detect);
  c_detect->add_option("--checkpoint", detect.checkpoint, "Checkpoint file")->required();
  c_detect->add_option("--input", detect.input, "Image (.ppm) or directory")->required();
  c_detect->add_option("--out", detect.out, "Output directory")->required();
  c_detect->add_flag("--overlay", detect.overlay, "Also write overlay images");

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract-lines", "Silhouette lines from a directory of masks");
  c_extract->add_option("--masks", extract.masks, "Directory of .pgm masks")->required();
  c_extract->add_option("--out", extract.out, "Output manifest path")->required();
  c_extract->add_option("--epsilon", extract.params.epsilon, "Simplification tolerance in pixels");
  c_extract->add_option("--min-length", extract.params.min_length, "Shortest emitted segment in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c_splits) return run_make_splits(splits);
    if (*c_synth) return run_synth(synth);
    if (*c_train) return run_train(train);
    if (*c_eval) return run_eval(eval);
    if (*c_detect) return run_detect(detect);
    if (*c_extract) return run_extract_lines(extract);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
