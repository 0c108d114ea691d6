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

#ifndef SSLINES_EVALUATE_HPP_
#define SSLINES_EVALUATE_HPP_

#include <functional>
#include <vector>

#include "sslines/checkpoint.hpp"
#include "sslines/encoding.hpp"
#include "sslines/metrics.hpp"
#include "sslines/train.hpp"

namespace sslines {

/// Produces output maps for the index-th evaluation image.
using Predictor = std::function<FeatureMaps(const Image& image, std::size_t index)>;

Predictor model_predictor(const LineModel& model);
/// Injects the encoded ground truth of each item as saturated maps.
Predictor oracle_predictor(const std::vector<LabeledItem>& items, const SolParams& sol = {});

/// Decoded lines in input pixels, with scores.
std::vector<LineSegment> detect_lines(const FeatureMaps& maps, const DecodeParams& decode);

EvalReport evaluate(const Predictor& predictor, const std::vector<LabeledItem>& items, const DecodeParams& decode,
                    const MetricConfig& metrics);
EvalReport evaluate(const LineModel& model, const std::vector<LabeledItem>& items, const DecodeParams& decode,
                    const MetricConfig& metrics);
/// Loads the manifest at the checkpoint's input size; unlabeled samples are a DataError.
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const DatasetManifest& manifest);

}  // namespace sslines

#endif  // SSLINES_EVALUATE_HPP_
