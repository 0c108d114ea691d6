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

#include "sslines/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sslines {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(CutMixMode mode) {
  switch (mode) {
    case CutMixMode::kOff:
      return "off";
    case CutMixMode::kAxis:
      return "axis";
    case CutMixMode::kSquare:
      return "square";
  }
  return "off";
}

CutMixMode parse_cutmix_mode(const std::string& s) {
  if (s == "off") return CutMixMode::kOff;
  if (s == "axis") return CutMixMode::kAxis;
  if (s == "square") return CutMixMode::kSquare;
  throw ConfigError("cutmix must be one of off, axis, square; got '" + s + "'");
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

/// Reads known keys of one JSON object and rejects everything else.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where() + "." + key + " has the wrong type");
    }
  }

  template <class Fn>
  void object(const char* key, Fn&& fn) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    ObjectReader child(*it, path_ + "." + key);
    fn(child);
    child.finish();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key '" + where() + "." + k + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_labeled_aug(ObjectReader& r, LabeledAugParams& p) {
  r.read("flip_prob", p.flip_prob);
  r.read("rotate", p.rotate);
  r.read("hue_shift", p.hue_shift);
  r.read("saturation_shift", p.saturation_shift);
  r.read("value_shift", p.value_shift);
  r.read("brightness_shift", p.brightness_shift);
  r.read("min_line_length", p.min_line_length);
}

ordered_json write_labeled_aug(const LabeledAugParams& p) {
  return {{"flip_prob", p.flip_prob},         {"rotate", p.rotate},
          {"hue_shift", p.hue_shift},         {"saturation_shift", p.saturation_shift},
          {"value_shift", p.value_shift},     {"brightness_shift", p.brightness_shift},
          {"min_line_length", p.min_line_length}};
}

void read_unlabeled_aug(ObjectReader& r, UnlabeledAugParams& p) {
  r.read("flip_prob", p.flip_prob);
  r.read("crop_scale_min", p.crop_scale_min);
  r.read("crop_scale_max", p.crop_scale_max);
  r.read("jitter_prob", p.jitter_prob);
  r.read("jitter_brightness", p.jitter_brightness);
  r.read("jitter_contrast", p.jitter_contrast);
  r.read("jitter_saturation", p.jitter_saturation);
  r.read("jitter_hue", p.jitter_hue);
  r.read("grayscale_prob", p.grayscale_prob);
  r.read("blur_prob", p.blur_prob);
  r.read("blur_sigma_min", p.blur_sigma_min);
  r.read("blur_sigma_max", p.blur_sigma_max);
}

ordered_json write_unlabeled_aug(const UnlabeledAugParams& p) {
  return {{"flip_prob", p.flip_prob},
          {"crop_scale_min", p.crop_scale_min},
          {"crop_scale_max", p.crop_scale_max},
          {"jitter_prob", p.jitter_prob},
          {"jitter_brightness", p.jitter_brightness},
          {"jitter_contrast", p.jitter_contrast},
          {"jitter_saturation", p.jitter_saturation},
          {"jitter_hue", p.jitter_hue},
          {"grayscale_prob", p.grayscale_prob},
          {"blur_prob", p.blur_prob},
          {"blur_sigma_min", p.blur_sigma_min},
          {"blur_sigma_max", p.blur_sigma_max}};
}

void read_cutmix(ObjectReader& r, CutMixParams& p) {
  r.read("axis_cut_min", p.axis_cut_min);
  r.read("axis_cut_max", p.axis_cut_max);
  r.read("box_area_min", p.box_area_min);
  r.read("box_area_max", p.box_area_max);
  r.read("box_ratio_min", p.box_ratio_min);
  r.read("box_ratio_max", p.box_ratio_max);
}

ordered_json write_cutmix(const CutMixParams& p) {
  return {{"axis_cut_min", p.axis_cut_min}, {"axis_cut_max", p.axis_cut_max}, {"box_area_min", p.box_area_min},
          {"box_area_max", p.box_area_max}, {"box_ratio_min", p.box_ratio_min}, {"box_ratio_max", p.box_ratio_max}};
}

void read_loss(ObjectReader& r, LabeledLossConfig& c) {
  r.object("weights", [&](ObjectReader& w) {
    auto& lw = c.weights;
    w.read("center", lw.center);
    w.read("disp", lw.disp);
    w.read("match", lw.match);
    w.read("sol_center", lw.sol_center);
    w.read("sol_disp", lw.sol_disp);
    w.read("sol_match", lw.sol_match);
    w.read("seg_line", lw.seg_line);
    w.read("seg_junction", lw.seg_junction);
    w.read("reg_length", lw.reg_length);
    w.read("reg_degree", lw.reg_degree);
  });
  r.read("center_positive_weight", c.center_positive_weight);
  r.read("junction_positive_weight", c.junction_positive_weight);
  r.read("line_positive_weight", c.line_positive_weight);
  r.read("sol_length", c.sol.sol_length);
  r.read("sol_overlap", c.sol.overlap_ratio);
  r.read("regression_radius", c.regression_radius);
  r.read("match_max_dist", c.match.max_dist);
  r.read("match_score_threshold", c.match.decode.score_threshold);
  r.read("match_topk", c.match.decode.topk);
}

ordered_json write_loss(const LabeledLossConfig& c) {
  const auto& w = c.weights;
  ordered_json weights = {{"center", w.center},         {"disp", w.disp},
                          {"match", w.match},           {"sol_center", w.sol_center},
                          {"sol_disp", w.sol_disp},     {"sol_match", w.sol_match},
                          {"seg_line", w.seg_line},     {"seg_junction", w.seg_junction},
                          {"reg_length", w.reg_length}, {"reg_degree", w.reg_degree}};
  return {{"weights", weights},
          {"center_positive_weight", c.center_positive_weight},
          {"junction_positive_weight", c.junction_positive_weight},
          {"line_positive_weight", c.line_positive_weight},
          {"sol_length", c.sol.sol_length},
          {"sol_overlap", c.sol.overlap_ratio},
          {"regression_radius", c.regression_radius},
          {"match_max_dist", c.match.max_dist},
          {"match_score_threshold", c.match.decode.score_threshold},
          {"match_topk", c.match.decode.topk}};
}

}  // namespace

void TrainConfig::validate() const {
  require(lr_supervised > 0 && lr_semi > 0, "learning rates must be positive");
  require(epochs_supervised >= 0 && epochs_semi >= 0, "epoch counts must be non-negative");
  require(std::isfinite(tau) && tau >= 0.0, "tau must be a finite non-negative number");
  require(std::isfinite(lambda_unlabeled) && lambda_unlabeled >= 0.0, "lambda_unlabeled must be non-negative");
  require(batch_labeled >= 1 && batch_unlabeled >= 1, "batch sizes must be at least 1");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(max_steps >= 0, "max_steps must be non-negative");
  require(val_every >= 1, "val_every must be at least 1");
  require(threads >= 1, "threads must be at least 1");
  require(in_unit(labeled_aug.flip_prob), "augment.labeled.flip_prob must be in [0, 1]");
  require(in_unit(unlabeled_aug.flip_prob) && in_unit(unlabeled_aug.jitter_prob) &&
              in_unit(unlabeled_aug.grayscale_prob) && in_unit(unlabeled_aug.blur_prob),
          "augment.unlabeled probabilities must be in [0, 1]");
  require(unlabeled_aug.crop_scale_min > 0 && unlabeled_aug.crop_scale_min <= unlabeled_aug.crop_scale_max &&
              unlabeled_aug.crop_scale_max <= 1.0,
          "augment.unlabeled crop scales must satisfy 0 < min <= max <= 1");
  require(unlabeled_aug.blur_sigma_min > 0 && unlabeled_aug.blur_sigma_min <= unlabeled_aug.blur_sigma_max,
          "augment.unlabeled blur sigmas must satisfy 0 < min <= max");
  require(cutmix_params.axis_cut_min > 0 && cutmix_params.axis_cut_min <= cutmix_params.axis_cut_max &&
              cutmix_params.axis_cut_max < 1,
          "augment.cutmix axis cut range must satisfy 0 < min <= max < 1");
  require(cutmix_params.box_area_min > 0 && cutmix_params.box_area_min <= cutmix_params.box_area_max &&
              cutmix_params.box_area_max < 1,
          "augment.cutmix box area range must satisfy 0 < min <= max < 1");
  require(cutmix_params.box_ratio_min > 0 && cutmix_params.box_ratio_min <= cutmix_params.box_ratio_max,
          "augment.cutmix box ratio range must satisfy 0 < min <= max");
  require(loss.center_positive_weight > 0 && loss.junction_positive_weight > 0 && loss.line_positive_weight > 0,
          "loss positive weights must be positive");
  require(loss.sol.sol_length > 0 && loss.sol.overlap_ratio >= 0 && loss.sol.overlap_ratio <= 0.9,
          "loss.sol_length must be positive and loss.sol_overlap in [0, 0.9]");
  require(loss.regression_radius >= 0 && loss.regression_radius <= 4, "loss.regression_radius must be in [0, 4]");
  require(decode.topk >= 1 && loss.match.decode.topk >= 1, "topk must be at least 1");
  require(metrics.heatmap.eval_size >= 8 && metrics.heatmap.n_thresholds >= 1 && metrics.heatmap.tolerance_px >= 0,
          "metric settings out of range");
  require(!metrics.sap_thresholds.empty(), "metrics.sap_thresholds must not be empty");
}

RunConfig RunConfig::for_profile(const std::string& profile) {
  RunConfig c;
  c.profile = profile;
  if (profile == "desk") {
    c.model = ModelConfig::desk();
    c.train.epochs_supervised = 300;
    c.train.epochs_semi = 40;
  } else if (profile == "reference") {
    c.model = ModelConfig::reference();
  } else {
    throw ConfigError("profile must be 'desk' or 'reference', got '" + profile + "'");
  }
  return c;
}

RunConfig RunConfig::from_json(const std::string& text) {
  json probe;
  try {
    probe = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  std::string profile = "desk";
  if (probe.is_object() && probe.contains("profile") && probe["profile"].is_string()) {
    profile = probe["profile"].get<std::string>();
  }
  return from_json(text, for_profile(profile));
}

RunConfig RunConfig::from_json(const std::string& text, const RunConfig& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = base;
  ObjectReader root(doc, "");
  int version = kSchemaVersion;
  root.read("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  root.read("profile", c.profile);
  root.object("model", [&](ObjectReader& r) {
    r.read("input_size", c.model.input_size);
    r.read("encoder", c.model.encoder);
    r.read("bottleneck", c.model.bottleneck);
    r.read("head", c.model.head);
    r.read("stage_convs", c.model.stage_convs);
    r.read("norm_groups", c.model.norm_groups);
    r.read("class_prior", c.model.class_prior);
  });
  auto& t = c.train;
  root.object("train", [&](ObjectReader& r) {
    r.read("lr_supervised", t.lr_supervised);
    r.read("lr_semi", t.lr_semi);
    r.read("epochs_supervised", t.epochs_supervised);
    r.read("epochs_semi", t.epochs_semi);
    r.read("tau", t.tau);
    r.read("lambda_unlabeled", t.lambda_unlabeled);
    r.read("batch_labeled", t.batch_labeled);
    r.read("batch_unlabeled", t.batch_unlabeled);
    r.read("seed", t.seed);
    r.read("dual_strong", t.dual_strong);
    std::string mode = to_string(t.cutmix);
    r.read("cutmix", mode);
    t.cutmix = parse_cutmix_mode(mode);
    r.read("weight_decay", t.weight_decay);
    r.read("max_steps", t.max_steps);
    r.read("val_every", t.val_every);
    r.read("threads", t.threads);
  });
  root.object("augment", [&](ObjectReader& r) {
    r.object("labeled", [&](ObjectReader& a) { read_labeled_aug(a, t.labeled_aug); });
    r.object("unlabeled", [&](ObjectReader& a) { read_unlabeled_aug(a, t.unlabeled_aug); });
    r.object("cutmix", [&](ObjectReader& a) { read_cutmix(a, t.cutmix_params); });
  });
  root.object("loss", [&](ObjectReader& r) { read_loss(r, t.loss); });
  root.object("decode", [&](ObjectReader& r) {
    r.read("score_threshold", t.decode.score_threshold);
    r.read("topk", t.decode.topk);
    r.read("min_length", t.decode.min_length);
  });
  root.object("metrics", [&](ObjectReader& r) {
    r.read("sap_thresholds", t.metrics.sap_thresholds);
    r.read("primary_k", t.metrics.primary_k);
    r.read("eval_size", t.metrics.heatmap.eval_size);
    r.read("tolerance_px", t.metrics.heatmap.tolerance_px);
    r.read("n_thresholds", t.metrics.heatmap.n_thresholds);
  });
  root.object("data", [&](ObjectReader& r) {
    r.read("train_manifest", c.data.train_manifest);
    r.read("test_manifest", c.data.test_manifest);
    r.read("split", c.data.split);
    r.read("val_count", c.data.val_count);
    r.read("warm_checkpoint", c.data.warm_checkpoint);
  });
  root.finish();
  c.validate();
  return c;
}

std::string RunConfig::to_json() const {
  const auto& t = train;
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["profile"] = profile;
  doc["model"] = {{"input_size", model.input_size},
                  {"encoder", model.encoder},
                  {"bottleneck", model.bottleneck},
                  {"head", model.head},
                  {"stage_convs", model.stage_convs},
                  {"norm_groups", model.norm_groups},
                  {"class_prior", model.class_prior}};
  doc["train"] = {{"lr_supervised", t.lr_supervised},
                  {"lr_semi", t.lr_semi},
                  {"epochs_supervised", t.epochs_supervised},
                  {"epochs_semi", t.epochs_semi},
                  {"tau", t.tau},
                  {"lambda_unlabeled", t.lambda_unlabeled},
                  {"batch_labeled", t.batch_labeled},
                  {"batch_unlabeled", t.batch_unlabeled},
                  {"seed", t.seed},
                  {"dual_strong", t.dual_strong},
                  {"cutmix", to_string(t.cutmix)},
                  {"weight_decay", t.weight_decay},
                  {"max_steps", t.max_steps},
                  {"val_every", t.val_every},
                  {"threads", t.threads}};
  doc["augment"] = {{"labeled", write_labeled_aug(t.labeled_aug)},
                    {"unlabeled", write_unlabeled_aug(t.unlabeled_aug)},
                    {"cutmix", write_cutmix(t.cutmix_params)}};
  doc["loss"] = write_loss(t.loss);
  doc["decode"] = {
      {"score_threshold", t.decode.score_threshold}, {"topk", t.decode.topk}, {"min_length", t.decode.min_length}};
  doc["metrics"] = {{"sap_thresholds", t.metrics.sap_thresholds},
                    {"primary_k", t.metrics.primary_k},
                    {"eval_size", t.metrics.heatmap.eval_size},
                    {"tolerance_px", t.metrics.heatmap.tolerance_px},
                    {"n_thresholds", t.metrics.heatmap.n_thresholds}};
  doc["data"] = {{"train_manifest", data.train_manifest},
                 {"test_manifest", data.test_manifest},
                 {"split", data.split},
                 {"val_count", data.val_count},
                 {"warm_checkpoint", data.warm_checkpoint}};
  return doc.dump(2) + "\n";
}

void RunConfig::validate() const {
  if (profile != "desk" && profile != "reference") throw ConfigError("profile must be 'desk' or 'reference'");
  model.validate();
  train.validate();
  require(data.val_count >= 0, "data.val_count must be non-negative");
}

RunConfig load_run_config(const std::string& path, const std::string& profile_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = profile_override.empty() ? RunConfig::from_json(ss.str())
                                         : RunConfig::from_json(ss.str(), RunConfig::for_profile(profile_override));
  if (!profile_override.empty()) c.profile = profile_override;
  require(in_unit(c.train.tau), "train.tau must be in [0, 1]");
  return c;
}

}  // namespace sslines
