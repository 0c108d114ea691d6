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

#include "sslines/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace sslines {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<char, 8> kMagic{'S', 'S', 'L', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

ordered_json record_json(const EpochRecord& r) {
  ordered_json j;
  j["stage"] = r.stage;
  j["epoch"] = r.epoch;
  j["steps"] = r.steps;
  j["lr"] = r.lr;
  j["losses"] = ordered_json::object();
  for (const auto& [k, v] : r.losses) j["losses"][k] = v;
  if (r.validated) {
    j["val_sap10"] = r.val_sap10;
    j["val_fh"] = r.val_fh;
  } else {
    j["val_sap10"] = nullptr;
    j["val_fh"] = nullptr;
  }
  j["mask_fraction"] = r.mask_fraction;
  return j;
}

EpochRecord record_from_json(const json& j) {
  EpochRecord r;
  r.stage = j.at("stage").get<std::string>();
  r.epoch = j.at("epoch").get<int>();
  r.steps = j.at("steps").get<long long>();
  r.lr = j.at("lr").get<double>();
  for (const auto& [k, v] : j.at("losses").items()) r.losses[k] = v.get<double>();
  r.validated = !j.at("val_sap10").is_null();
  if (r.validated) {
    r.val_sap10 = j.at("val_sap10").get<double>();
    r.val_fh = j.at("val_fh").get<double>();
  }
  r.mask_fraction = j.at("mask_fraction").get<double>();
  return r;
}

}  // namespace

std::string EpochRecord::to_json_line() const { return record_json(*this).dump() + "\n"; }

Checkpoint make_checkpoint(const LineModel& model, const RunConfig& config, const std::string& stage, int epoch) {
  Checkpoint c;
  c.config = config;
  c.config.model = model.config();
  c.stage = stage;
  c.epoch = epoch;
  for (const auto& p : model.parameters()) c.params.push_back({p.name, p.shape, p.value, {}});
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  ordered_json header;
  header["config"] = ordered_json::parse(ckpt.config.to_json());
  header["stage"] = ckpt.stage;
  header["epoch"] = ckpt.epoch;
  header["val_metrics"] = ordered_json::object();
  for (const auto& [k, v] : ckpt.val_metrics) header["val_metrics"][k] = v;
  header["history"] = ordered_json::array();
  for (const auto& r : ckpt.history) header["history"].push_back(record_json(r));
  header["rng_states"] = ordered_json::object();
  for (const auto& [k, v] : ckpt.rng_states) header["rng_states"][k] = v;
  header["tensors"] = ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& p : ckpt.params) {
    header["tensors"].push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}, {"count", p.value.size()}});
    offset += p.value.size();
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : ckpt.params) {
    out.write(reinterpret_cast<const char*>(p.value.data()), static_cast<std::streamsize>(p.value.size() * 4));
  }
  if (!out) throw DataError("failed while writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint not found: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError(path.string() + " is not a checkpoint file");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ull << 32)) throw DataError("corrupt checkpoint header in " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated checkpoint " + path.string());
  Checkpoint c;
  try {
    const json header = json::parse(text);
    c.config = RunConfig::from_json(header.at("config").dump(), RunConfig::for_profile(
                                                                    header.at("config").at("profile").get<std::string>()));
    c.stage = header.at("stage").get<std::string>();
    c.epoch = header.at("epoch").get<int>();
    for (const auto& [k, v] : header.at("val_metrics").items()) c.val_metrics[k] = v.get<double>();
    for (const auto& r : header.at("history")) c.history.push_back(record_from_json(r));
    for (const auto& [k, v] : header.at("rng_states").items()) c.rng_states[k] = v.get<std::string>();
    for (const auto& t : header.at("tensors")) {
      Parameter p;
      p.name = t.at("name").get<std::string>();
      p.shape = t.at("shape").get<std::vector<int>>();
      p.value.resize(t.at("count").get<std::size_t>());
      c.params.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
  for (auto& p : c.params) {
    in.read(reinterpret_cast<char*>(p.value.data()), static_cast<std::streamsize>(p.value.size() * 4));
    if (!in) throw DataError("truncated checkpoint " + path.string());
  }
  return c;
}

void load_parameters(LineModel& model, const std::vector<Parameter>& params) {
  auto& dst = model.parameters();
  if (dst.size() != params.size()) {
    throw ConfigError("checkpoint has " + std::to_string(params.size()) + " tensors, model expects " +
                      std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].name != params[i].name || dst[i].shape != params[i].shape) {
      throw ConfigError("checkpoint tensor '" + params[i].name + "' does not match model tensor '" + dst[i].name + "'");
    }
    dst[i].value = params[i].value;
  }
}

LineModel model_from_checkpoint(const Checkpoint& ckpt) {
  LineModel model(ckpt.config.model, 0);
  load_parameters(model, ckpt.params);
  return model;
}

}  // namespace sslines
