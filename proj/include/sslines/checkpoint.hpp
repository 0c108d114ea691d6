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

#ifndef SSLINES_CHECKPOINT_HPP_
#define SSLINES_CHECKPOINT_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sslines/config.hpp"
#include "sslines/model.hpp"

namespace sslines {

/// One line of the training log.
struct EpochRecord {
  std::string stage;
  int epoch = 0;
  long long steps = 0;
  double lr = 0.0;
  std::map<std::string, double> losses;
  double val_sap10 = 0.0;
  double val_fh = 0.0;
  double mask_fraction = 0.0;
  bool validated = false;

  std::string to_json_line() const;
};

/**
 * Self-describing checkpoint. On disk: the 8-byte magic "SSLCKPT1", a
 * little-endian uint64 header length, a JSON header (config snapshot, stage,
 * epoch, metrics, history, rng states, tensor table), then the raw float32
 * parameter blobs in table order.
 */
struct Checkpoint {
  RunConfig config;
  std::string stage;
  int epoch = 0;
  std::map<std::string, double> val_metrics;
  std::vector<EpochRecord> history;
  std::map<std::string, std::string> rng_states;
  std::vector<Parameter> params;  // values only; grads are left empty
};

Checkpoint make_checkpoint(const LineModel& model, const RunConfig& config, const std::string& stage, int epoch);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Model with the checkpoint's architecture and parameter values.
LineModel model_from_checkpoint(const Checkpoint& ckpt);
/// Copy parameter values into an existing model, checking names and shapes.
void load_parameters(LineModel& model, const std::vector<Parameter>& params);

}  // namespace sslines

#endif  // SSLINES_CHECKPOINT_HPP_
