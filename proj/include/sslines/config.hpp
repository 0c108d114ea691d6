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

#ifndef SSLINES_CONFIG_HPP_
#define SSLINES_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "sslines/augment.hpp"
#include "sslines/encoding.hpp"
#include "sslines/losses.hpp"
#include "sslines/metrics.hpp"
#include "sslines/model.hpp"

namespace sslines {

std::string to_string(CutMixMode mode);
CutMixMode parse_cutmix_mode(const std::string& s);

struct TrainConfig {
  double lr_supervised = 1e-3;
  double lr_semi = 1e-4;
  int epochs_supervised = 300;
  int epochs_semi = 100;
  double tau = 0.7;
  double lambda_unlabeled = 1.0;
  int batch_labeled = 4;
  int batch_unlabeled = 4;
  std::uint64_t seed = 0;
  bool dual_strong = true;
  CutMixMode cutmix = CutMixMode::kAxis;
  double weight_decay = 0.0;
  int max_steps = 0;   // stop after this many optimizer steps in a stage; 0 = no limit
  int val_every = 1;   // epochs between validation passes
  int threads = 1;     // OpenMP threads for the kernels; 1 = strict deterministic mode

  LabeledAugParams labeled_aug;
  UnlabeledAugParams unlabeled_aug;
  CutMixParams cutmix_params;
  LabeledLossConfig loss;
  DecodeParams decode;
  MetricConfig metrics;

  /// Range checks. tau above 1 is accepted here (the gate never opens); the
  /// config-file schema restricts it to [0, 1].
  void validate() const;
};

struct DataConfig {
  std::string train_manifest;
  std::string test_manifest;
  std::string split;            // split file; empty = every train sample labeled
  int val_count = 50;           // samples carved from the train manifest for validation
  std::string warm_checkpoint;  // required by the semi stage
};

/// Complete run description. Every field has a default; files may override
/// any subset.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  std::string profile = "desk";
  ModelConfig model;
  TrainConfig train;
  DataConfig data;

  static RunConfig for_profile(const std::string& profile);

  /// Strict parse: unknown keys, wrong types and out-of-range values throw
  /// ConfigError. Missing keys keep the defaults of `base`.
  static RunConfig from_json(const std::string& text, const RunConfig& base);
  static RunConfig from_json(const std::string& text);
  std::string to_json() const;

  void validate() const;
};

RunConfig load_run_config(const std::string& path, const std::string& profile_override = "");

}  // namespace sslines

#endif  // SSLINES_CONFIG_HPP_
