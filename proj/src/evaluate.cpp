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

#include "sslines/evaluate.hpp"

namespace sslines {

Predictor model_predictor(const LineModel& model) {
  return [&model](const Image& image, std::size_t) { return model.forward(image); };
}

Predictor oracle_predictor(const std::vector<LabeledItem>& items, const SolParams& sol) {
  return [&items, sol](const Image& image, std::size_t index) {
    const int h = image.height() / ModelConfig::kDownsample;
    const int w = image.width() / ModelConfig::kDownsample;
    std::vector<LineSegment> scaled;
    for (const auto& l : items.at(index).lines) {
      scaled.push_back({l.start * 0.25, l.end * 0.25, std::nullopt});
    }
    return ideal_feature_maps(encode_ground_truth(scaled, h, w, sol));
  };
}

std::vector<LineSegment> detect_lines(const FeatureMaps& maps, const DecodeParams& decode) {
  auto lines = decode_lines(maps, decode);
  const double s = ModelConfig::kDownsample;
  for (auto& l : lines) {
    l.start = l.start * s;
    l.end = l.end * s;
  }
  return lines;
}

EvalReport evaluate(const Predictor& predictor, const std::vector<LabeledItem>& items, const DecodeParams& decode,
                    const MetricConfig& metrics) {
  std::vector<LineSet> preds;
  std::vector<LineSet> gts;
  std::vector<std::pair<int, int>> sizes;
  for (std::size_t i = 0; i < items.size(); ++i) {
    preds.push_back(detect_lines(predictor(items[i].image, i), decode));
    gts.push_back(items[i].lines);
    sizes.emplace_back(items[i].image.width(), items[i].image.height());
  }
  return evaluate_lines(preds, gts, sizes, metrics);
}

EvalReport evaluate(const LineModel& model, const std::vector<LabeledItem>& items, const DecodeParams& decode,
                    const MetricConfig& metrics) {
  return evaluate(model_predictor(model), items, decode, metrics);
}

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const DatasetManifest& manifest) {
  const LineModel model = model_from_checkpoint(ckpt);
  const auto items = load_labeled_items(manifest, ckpt.config.model.input_size);
  return evaluate(model, items, ckpt.config.train.decode, ckpt.config.train.metrics);
}

}  // namespace sslines
