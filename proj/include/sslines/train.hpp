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

#ifndef SSLINES_TRAIN_HPP_
#define SSLINES_TRAIN_HPP_

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sslines/checkpoint.hpp"
#include "sslines/config.hpp"
#include "sslines/data.hpp"
#include "sslines/losses.hpp"
#include "sslines/model.hpp"

namespace sslines {

/// A labeled image resized to the model input, with lines in input pixels.
struct LabeledItem {
  std::string id;
  Image image;
  std::vector<LineSegment> lines;
};

LabeledItem prepare_item(const std::string& id, const Image& image, std::span<const LineSegment> lines,
                         int input_size);
/// Loads and resizes every sample; throws DataError for unlabeled samples.
std::vector<LabeledItem> load_labeled_items(const DatasetManifest& manifest, int input_size);
std::vector<Image> load_images(const DatasetManifest& manifest, int input_size);
/// In-memory variant for generated data.
std::vector<LabeledItem> items_from_synth(const SynthDataset& data, std::span<const std::string> ids, int input_size);

struct StepRecord {
  std::string stage;
  long long step = 0;  // 1-based within the stage
  LabeledLossBreakdown labeled;         // batch mean
  ConsistencyLossBreakdown consistency; // batch mean
  double total = 0.0;
};

struct TrainHooks {
  std::function<void(const StepRecord&, const LineModel&)> on_step;
  std::function<void(const EpochRecord&)> on_epoch;
  std::ostream* log = nullptr;  // receives one JSON line per epoch
};

struct TrainResult {
  Checkpoint best;  // highest validation sAP at the primary k (last epoch without a validation set)
  Checkpoint last;
  std::vector<EpochRecord> history;
  std::vector<StepRecord> steps;
};

/**
 * Supervised stage: labeled loss only, Adam at lr_supervised. Each epoch is
 * ceil(N / batch_labeled) steps drawn from the labeled stream.
 */
TrainResult train_supervised(LineModel& model, const std::vector<LabeledItem>& labeled,
                             const std::vector<LabeledItem>& val, const RunConfig& config,
                             const TrainHooks& hooks = {});

/**
 * Semi-supervised stage, started from the model's current weights at
 * lr_semi. Each step draws a labeled batch from the same labeled stream as
 * the supervised stage and an unlabeled batch from a separate stream; an
 * epoch is one pass over the unlabeled set.
 */
TrainResult train_semi(LineModel& model, const std::vector<LabeledItem>& labeled, const std::vector<Image>& unlabeled,
                       const std::vector<LabeledItem>& val, const RunConfig& config, const TrainHooks& hooks = {});

}  // namespace sslines

#endif  // SSLINES_TRAIN_HPP_
