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

#include "sslines/train.hpp"

#include <algorithm>
#include <numeric>

#include "sslines/augment.hpp"
#include "sslines/evaluate.hpp"
#include "sslines/image.hpp"
#include "sslines/kernels.hpp"

namespace sslines {

LabeledItem prepare_item(const std::string& id, const Image& image, std::span<const LineSegment> lines,
                         int input_size) {
  LabeledItem item;
  item.id = id;
  const double sx = static_cast<double>(input_size) / image.width();
  const double sy = static_cast<double>(input_size) / image.height();
  item.image = (image.width() == input_size && image.height() == input_size)
                   ? image
                   : resize_image(image, input_size, input_size);
  for (const auto& l : lines) {
    item.lines.push_back({{l.start.x * sx, l.start.y * sy}, {l.end.x * sx, l.end.y * sy}, std::nullopt});
  }
  return item;
}

std::vector<LabeledItem> load_labeled_items(const DatasetManifest& manifest, int input_size) {
  std::vector<LabeledItem> out;
  for (const auto& s : manifest.samples) {
    if (!s.labeled()) throw DataError("sample '" + s.image_id + "' has no line labels");
    out.push_back(prepare_item(s.image_id, read_image(manifest.resolve(s)), *s.lines, input_size));
  }
  return out;
}

std::vector<Image> load_images(const DatasetManifest& manifest, int input_size) {
  std::vector<Image> out;
  for (const auto& s : manifest.samples) {
    Image img = read_image(manifest.resolve(s));
    if (img.width() != input_size || img.height() != input_size) img = resize_image(img, input_size, input_size);
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<LabeledItem> items_from_synth(const SynthDataset& data, std::span<const std::string> ids, int input_size) {
  std::vector<LabeledItem> out;
  for (const auto& id : ids) {
    const auto it = std::find_if(data.manifest.samples.begin(), data.manifest.samples.end(),
                                 [&](const Sample& s) { return s.image_id == id; });
    if (it == data.manifest.samples.end()) throw DataError("unknown image_id '" + id + "'");
    const auto idx = static_cast<std::size_t>(it - data.manifest.samples.begin());
    out.push_back(prepare_item(id, data.images[idx], it->lines.value_or(std::vector<LineSegment>{}), input_size));
  }
  return out;
}

namespace {

constexpr double kMapScale = 1.0 / ModelConfig::kDownsample;

/// Endless reshuffled pass over [0, n).
class IndexStream {
 public:
  IndexStream(std::size_t n, Rng rng) : rng_(rng), order_(n) { reshuffle(); }

  std::vector<std::size_t> next(int count) {
    std::vector<std::size_t> out;
    for (int i = 0; i < count; ++i) {
      if (pos_ == order_.size()) reshuffle();
      out.push_back(order_[pos_++]);
    }
    return out;
  }

  Rng& rng() { return rng_; }

 private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng_.shuffle(order_.begin(), order_.end());
    pos_ = 0;
  }

  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

void accumulate(LabeledLossBreakdown& acc, const LabeledLossBreakdown& b, double s) {
  acc.center += s * b.center;
  acc.disp += s * b.disp;
  acc.match += s * b.match;
  acc.sol_center += s * b.sol_center;
  acc.sol_disp += s * b.sol_disp;
  acc.sol_match += s * b.sol_match;
  acc.seg_line += s * b.seg_line;
  acc.seg_junction += s * b.seg_junction;
  acc.reg_length += s * b.reg_length;
  acc.reg_degree += s * b.reg_degree;
  acc.total += s * b.total;
}

void accumulate(ConsistencyLossBreakdown& acc, const ConsistencyLossBreakdown& b, double s) {
  acc.classification += s * b.classification;
  acc.regression += s * b.regression;
  acc.mask_fraction += s * b.mask_fraction;
  acc.total += s * b.total;
}

std::vector<LineSegment> to_map(std::span<const LineSegment> lines) {
  std::vector<LineSegment> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back({l.start * kMapScale, l.end * kMapScale, std::nullopt});
  return out;
}

LabeledLossBreakdown labeled_pass(LineModel& model, const std::vector<LabeledItem>& data,
                                  std::span<const std::size_t> batch, Rng& rng, const TrainConfig& t) {
  LabeledLossBreakdown mean;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t idx : batch) {
    const auto& item = data[idx];
    const auto aug = labeled_augment(item.image, item.lines, rng, t.labeled_aug);
    const auto map_lines = to_map(aug.lines);
    const auto gt = encode_ground_truth(map_lines, aug.image.height() / ModelConfig::kDownsample,
                                        aug.image.width() / ModelConfig::kDownsample, t.loss.sol,
                                        t.loss.regression_radius);
    LineModel::Cache cache;
    const FeatureMaps pred = model.forward(aug.image, &cache);
    auto res = labeled_loss(pred, gt, map_lines, t.loss);
    for (auto& g : res.grad.values()) g *= scale;
    model.backward(cache, res.grad);
    accumulate(mean, res.breakdown, scale);
  }
  return mean;
}

ConsistencyLossBreakdown unlabeled_pass(LineModel& model, const std::vector<Image>& data,
                                        std::span<const std::size_t> batch, Rng& rng, const TrainConfig& t) {
  std::vector<UnlabeledTriple> triples;
  for (std::size_t idx : batch) triples.push_back(make_unlabeled_triple(data[idx], rng, t.unlabeled_aug));
  const CutMixResult mixed = cutmix_batch(triples, rng, t.cutmix, t.cutmix_params);

  // Weak predictions are fixed targets: no cache, no backward.
  std::vector<FeatureMaps> weak;
  for (const auto& tr : triples) weak.push_back(model.forward(tr.weak));

  ConsistencyLossBreakdown mean;
  const double scale = t.lambda_unlabeled / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    LineModel::Cache c1, c2;
    const FeatureMaps s1 = model.forward(mixed.strong1[i], &c1);
    FeatureMaps s2;
    if (t.dual_strong) s2 = model.forward(mixed.strong2[i], &c2);
    const MixMask& mask = mixed.masks[i];
    std::optional<WeakMix> mix;
    if (mask.kind != MixKind::kNone) mix.emplace(WeakMix{weak[static_cast<std::size_t>(mask.partner)], mask});
    auto res = consistency_loss(weak[i], s1, t.dual_strong ? &s2 : nullptr, t.tau, mix ? &*mix : nullptr);
    accumulate(mean, res.breakdown, 1.0 / static_cast<double>(batch.size()));
    if (res.breakdown.mask_fraction == 0.0 || scale == 0.0) continue;
    for (auto& g : res.grad_strong1.values()) g *= scale;
    model.backward(c1, res.grad_strong1);
    if (t.dual_strong) {
      for (auto& g : res.grad_strong2.values()) g *= scale;
      model.backward(c2, res.grad_strong2);
    }
  }
  return mean;
}

std::map<std::string, double> loss_map(const LabeledLossBreakdown& l) {
  return {{"center", l.center},         {"disp", l.disp},
          {"match", l.match},           {"sol_center", l.sol_center},
          {"sol_disp", l.sol_disp},     {"sol_match", l.sol_match},
          {"seg_line", l.seg_line},     {"seg_junction", l.seg_junction},
          {"reg_length", l.reg_length}, {"reg_degree", l.reg_degree},
          {"labeled", l.total}};
}

/// Shared epoch bookkeeping of both stages.
class StageRunner {
 public:
  StageRunner(std::string stage, LineModel& model, const std::vector<LabeledItem>& val, const RunConfig& config,
              const TrainHooks& hooks, double lr)
      : stage_(std::move(stage)), model_(model), val_(val), config_(config), hooks_(hooks), lr_(lr) {}

  bool budget_left() const { return config_.train.max_steps == 0 || steps_ < config_.train.max_steps; }

  void record_step(StepRecord r) {
    r.step = ++steps_;
    r.stage = stage_;
    epoch_labeled_.push_back(r.labeled);
    epoch_consistency_.push_back(r.consistency);
    epoch_total_.push_back(r.total);
    if (hooks_.on_step) hooks_.on_step(r, model_);
    result_.steps.push_back(std::move(r));
  }

  void end_epoch(int epoch, bool final_epoch, const std::map<std::string, std::string>& rng_states,
                 bool with_consistency) {
    EpochRecord rec;
    rec.stage = stage_;
    rec.epoch = epoch;
    rec.steps = steps_;
    rec.lr = lr_;
    LabeledLossBreakdown lab;
    ConsistencyLossBreakdown con;
    double total = 0.0;
    const double n = std::max<std::size_t>(1, epoch_total_.size());
    for (std::size_t i = 0; i < epoch_total_.size(); ++i) {
      accumulate(lab, epoch_labeled_[i], 1.0 / n);
      accumulate(con, epoch_consistency_[i], 1.0 / n);
      total += epoch_total_[i] / n;
    }
    rec.losses = loss_map(lab);
    if (with_consistency) {
      rec.losses["consistency"] = con.total;
      rec.losses["consistency_classification"] = con.classification;
      rec.losses["consistency_regression"] = con.regression;
      rec.mask_fraction = con.mask_fraction;
    }
    rec.losses["total"] = total;
    epoch_labeled_.clear();
    epoch_consistency_.clear();
    epoch_total_.clear();

    const auto& t = config_.train;
    if (!val_.empty() && (epoch % t.val_every == 0 || final_epoch)) {
      const EvalReport report = evaluate(model_, val_, t.decode, t.metrics);
      rec.validated = true;
      rec.val_sap10 = report.sap.at(t.metrics.primary_k);
      rec.val_fh = report.f_h;
    }
    result_.history.push_back(rec);
    if (hooks_.on_epoch) hooks_.on_epoch(rec);
    if (hooks_.log) *hooks_.log << rec.to_json_line() << std::flush;

    Checkpoint ckpt = make_checkpoint(model_, config_, stage_, epoch);
    ckpt.rng_states = rng_states;
    if (rec.validated) {
      ckpt.val_metrics = {{"sap" + std::to_string(t.metrics.primary_k), rec.val_sap10}, {"fh", rec.val_fh}};
    }
    const bool better = rec.validated && (!have_best_ || rec.val_sap10 > best_sap_);
    if (better || (val_.empty() && final_epoch) || (!have_best_ && final_epoch)) {
      have_best_ = true;
      best_sap_ = rec.val_sap10;
      result_.best = ckpt;
    }
    if (final_epoch) result_.last = std::move(ckpt);
  }

  TrainResult finish() {
    if (result_.last.params.empty()) {
      result_.last = make_checkpoint(model_, config_, stage_, 0);
      if (!have_best_) result_.best = result_.last;
    }
    result_.best.history = result_.history;
    result_.last.history = result_.history;
    return std::move(result_);
  }

 private:
  std::string stage_;
  LineModel& model_;
  const std::vector<LabeledItem>& val_;
  const RunConfig& config_;
  const TrainHooks& hooks_;
  double lr_;
  long long steps_ = 0;
  bool have_best_ = false;
  double best_sap_ = 0.0;
  std::vector<LabeledLossBreakdown> epoch_labeled_;
  std::vector<ConsistencyLossBreakdown> epoch_consistency_;
  std::vector<double> epoch_total_;
  TrainResult result_;
};

}  // namespace

TrainResult train_supervised(LineModel& model, const std::vector<LabeledItem>& labeled,
                             const std::vector<LabeledItem>& val, const RunConfig& config, const TrainHooks& hooks) {
  const auto& t = config.train;
  t.validate();
  if (labeled.empty()) throw ConfigError("train_supervised: the labeled set is empty");
  kernels::set_num_threads(t.threads);

  Rng master(t.seed);
  IndexStream labeled_stream(labeled.size(), master.fork(1));
  Adam opt(model.parameters(), {t.lr_supervised, 0.9, 0.999, 1e-8, t.weight_decay});
  StageRunner runner("supervised", model, val, config, hooks, t.lr_supervised);

  const int b = std::min<int>(t.batch_labeled, static_cast<int>(labeled.size()));
  const int steps_per_epoch = static_cast<int>((labeled.size() + b - 1) / b);
  for (int epoch = 1; epoch <= t.epochs_supervised && runner.budget_left(); ++epoch) {
    for (int s = 0; s < steps_per_epoch && runner.budget_left(); ++s) {
      const auto batch = labeled_stream.next(b);
      model.zero_grad();
      StepRecord r;
      r.labeled = labeled_pass(model, labeled, batch, labeled_stream.rng(), t);
      r.total = r.labeled.total;
      opt.step(model.parameters());
      runner.record_step(std::move(r));
    }
    const bool final_epoch = epoch == t.epochs_supervised || !runner.budget_left();
    runner.end_epoch(epoch, final_epoch, {{"labeled", labeled_stream.rng().state()}}, false);
  }
  return runner.finish();
}

TrainResult train_semi(LineModel& model, const std::vector<LabeledItem>& labeled, const std::vector<Image>& unlabeled,
                       const std::vector<LabeledItem>& val, const RunConfig& config, const TrainHooks& hooks) {
  const auto& t = config.train;
  t.validate();
  if (labeled.empty()) throw ConfigError("train_semi: the labeled set is empty");
  if (unlabeled.empty()) {
    throw ConfigError("train_semi: the unlabeled set is empty; use train_supervised for labeled-only training");
  }
  kernels::set_num_threads(t.threads);

  Rng master(t.seed);
  IndexStream labeled_stream(labeled.size(), master.fork(1));
  Rng unlabeled_rng = master.fork(2);
  Adam opt(model.parameters(), {t.lr_semi, 0.9, 0.999, 1e-8, t.weight_decay});
  StageRunner runner("semi", model, val, config, hooks, t.lr_semi);

  const int bl = std::min<int>(t.batch_labeled, static_cast<int>(labeled.size()));
  const int bu = std::min<int>(t.batch_unlabeled, static_cast<int>(unlabeled.size()));
  std::vector<std::size_t> order(unlabeled.size());
  for (int epoch = 1; epoch <= t.epochs_semi && runner.budget_left(); ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    unlabeled_rng.shuffle(order.begin(), order.end());
    for (std::size_t pos = 0; pos < order.size() && runner.budget_left(); pos += bu) {
      const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(bu));
      const std::vector<std::size_t> ubatch(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                            order.begin() + static_cast<std::ptrdiff_t>(end));
      const auto lbatch = labeled_stream.next(bl);
      model.zero_grad();
      StepRecord r;
      r.labeled = labeled_pass(model, labeled, lbatch, labeled_stream.rng(), t);
      r.consistency = unlabeled_pass(model, unlabeled, ubatch, unlabeled_rng, t);
      r.total = r.labeled.total + t.lambda_unlabeled * r.consistency.total;
      opt.step(model.parameters());
      runner.record_step(std::move(r));
    }
    const bool final_epoch = epoch == t.epochs_semi || !runner.budget_left();
    runner.end_epoch(epoch, final_epoch,
                     {{"labeled", labeled_stream.rng().state()}, {"unlabeled", unlabeled_rng.state()}}, true);
  }
  return runner.finish();
}

}  // namespace sslines
