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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sslines/config.hpp"
#include "sslines/evaluate.hpp"
#include "sslines/train.hpp"

using namespace sslines;

namespace {

RunConfig tiny_config() {
  RunConfig c = RunConfig::for_profile("desk");
  c.model.input_size = 32;
  c.model.encoder = {4, 6, 8};
  c.model.bottleneck = 8;
  c.model.head = 6;
  c.train.batch_labeled = 2;
  c.train.batch_unlabeled = 2;
  c.train.epochs_supervised = 2;
  c.train.epochs_semi = 2;
  c.train.lr_semi = c.train.lr_supervised;
  c.train.metrics.heatmap.n_thresholds = 5;
  return c;
}

struct TinyData {
  std::vector<LabeledItem> labeled, val;
  std::vector<Image> unlabeled;
};

TinyData tiny_data() {
  const auto synth = synth_line_dataset(10, 64, 7);
  std::vector<std::string> ids;
  for (const auto& s : synth.manifest.samples) ids.push_back(s.image_id);
  TinyData d;
  const auto all = items_from_synth(synth, ids, 32);
  d.labeled.assign(all.begin(), all.begin() + 4);
  d.val.assign(all.begin() + 4, all.begin() + 6);
  for (std::size_t i = 6; i < all.size(); ++i) d.unlabeled.push_back(all[i].image);
  return d;
}

std::vector<std::vector<float>> values_of(const LineModel& m) {
  std::vector<std::vector<float>> out;
  for (const auto& p : m.parameters()) out.push_back(p.value);
  return out;
}

}  // namespace

TEST_CASE("config: json round trip is stable") {
  RunConfig c = RunConfig::for_profile("reference");
  c.train.tau = 0.55;
  c.train.cutmix = CutMixMode::kSquare;
  c.data.split = "splits/x.json";
  const std::string text = c.to_json();
  const RunConfig back = RunConfig::from_json(text);
  CHECK(back.to_json() == text);
  CHECK(back.model.encoder == c.model.encoder);
  CHECK(back.train.cutmix == CutMixMode::kSquare);
}

TEST_CASE("config: partial files keep profile defaults") {
  const RunConfig c = RunConfig::from_json(R"({"profile": "reference", "train": {"seed": 9}})");
  CHECK(c.model.encoder == ModelConfig::reference().encoder);
  CHECK(c.train.seed == 9);
  CHECK(c.train.tau == RunConfig::for_profile("reference").train.tau);
}

TEST_CASE("config: strict parsing") {
  CHECK_THROWS_AS(RunConfig::from_json(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"train": {"taux": 0.5}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"augment": {"cutmix": {"nope": 1}}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"train": {"tau": "high"}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"train": []})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"schema_version": 2})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"train": {"cutmix": "diagonal"}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"train": {"batch_labeled": 0}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(RunConfig::for_profile("laptop"), ConfigError);
}

TEST_CASE("config: files restrict tau to the unit interval") {
  const auto path = std::filesystem::temp_directory_path() / "sslines_tau_test.json";
  {
    std::ofstream(path) << R"({"train": {"tau": 1.5}})";
  }
  CHECK_THROWS_AS(load_run_config(path.string()), ConfigError);
  {
    std::ofstream(path) << R"({"train": {"tau": 0.9}})";
  }
  CHECK(load_run_config(path.string()).train.tau == 0.9);
  CHECK(load_run_config(path.string(), "reference").profile == "reference");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_run_config(path.string()), ConfigError);
}

TEST_CASE("train: empty sets are rejected") {
  const RunConfig c = tiny_config();
  const TinyData d = tiny_data();
  LineModel m(c.model, 0);
  CHECK_THROWS_AS(train_supervised(m, {}, d.val, c), ConfigError);
  CHECK_THROWS_AS(train_semi(m, {}, d.unlabeled, d.val, c), ConfigError);
  CHECK_THROWS_AS(train_semi(m, d.labeled, {}, d.val, c), ConfigError);
}

TEST_CASE("train: supervised runs are reproducible") {
  const RunConfig c = tiny_config();
  const TinyData d = tiny_data();
  LineModel a(c.model, 3), b(c.model, 3);
  const auto ra = train_supervised(a, d.labeled, d.val, c);
  const auto rb = train_supervised(b, d.labeled, d.val, c);
  CHECK(values_of(a) == values_of(b));
  REQUIRE(ra.history.size() == 2);
  REQUIRE(rb.history.size() == 2);
  for (std::size_t i = 0; i < ra.history.size(); ++i) CHECK(ra.history[i].to_json_line() == rb.history[i].to_json_line());
  CHECK(ra.steps.size() == 4);

  RunConfig other = c;
  other.train.seed = 1;
  LineModel e(c.model, 3);
  train_supervised(e, d.labeled, d.val, other);
  CHECK(values_of(e) != values_of(a));
}

TEST_CASE("train: closed gate reduces semi to supervised") {
  RunConfig c = tiny_config();
  c.train.tau = 1.1;
  c.train.max_steps = 6;
  c.train.epochs_supervised = 100;
  c.train.epochs_semi = 100;
  const TinyData d = tiny_data();
  LineModel sup(c.model, 5), semi(c.model, 5);
  const auto rs = train_supervised(sup, d.labeled, {}, c);
  const auto ru = train_semi(semi, d.labeled, d.unlabeled, {}, c);
  CHECK(rs.steps.size() == 6);
  CHECK(ru.steps.size() == 6);
  CHECK(values_of(sup) == values_of(semi));
  for (const auto& s : ru.steps) CHECK(s.consistency.mask_fraction == 0.0);
}

TEST_CASE("train: zero weight on the consistency term also reduces to supervised") {
  RunConfig c = tiny_config();
  c.train.tau = 0.0;
  c.train.lambda_unlabeled = 0.0;
  c.train.max_steps = 4;
  c.train.epochs_supervised = 100;
  c.train.epochs_semi = 100;
  const TinyData d = tiny_data();
  LineModel sup(c.model, 5), semi(c.model, 5);
  train_supervised(sup, d.labeled, {}, c);
  const auto ru = train_semi(semi, d.labeled, d.unlabeled, {}, c);
  CHECK(values_of(sup) == values_of(semi));
  bool opened = false;
  for (const auto& s : ru.steps) opened = opened || s.consistency.mask_fraction > 0.0;
  CHECK(opened);
}

TEST_CASE("train: best checkpoint and hooks") {
  RunConfig c = tiny_config();
  c.train.epochs_supervised = 3;
  const TinyData d = tiny_data();
  LineModel m(c.model, 2);
  int step_calls = 0, epoch_calls = 0;
  std::ostringstream log;
  TrainHooks hooks;
  hooks.on_step = [&](const StepRecord&, const LineModel&) { ++step_calls; };
  hooks.on_epoch = [&](const EpochRecord&) { ++epoch_calls; };
  hooks.log = &log;
  const auto r = train_supervised(m, d.labeled, d.val, c, hooks);
  CHECK(step_calls == 6);
  CHECK(epoch_calls == 3);
  const std::string text = log.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(r.last.epoch == 3);
  double best = -1.0;
  int best_epoch = 0;
  for (const auto& e : r.history) {
    CHECK(e.validated);
    if (e.val_sap10 > best) {
      best = e.val_sap10;
      best_epoch = e.epoch;
    }
  }
  CHECK(r.best.epoch == best_epoch);

  LineModel n(c.model, 2);
  const auto no_val = train_supervised(n, d.labeled, {}, c);
  CHECK(no_val.best.epoch == 3);
  CHECK(no_val.best.params.size() == no_val.last.params.size());
}

TEST_CASE("evaluate: oracle predictor scores perfectly, random weights do not") {
  const auto synth = synth_line_dataset(6, 128, 11);
  std::vector<std::string> ids;
  for (const auto& s : synth.manifest.samples) ids.push_back(s.image_id);
  const auto items = items_from_synth(synth, ids, 128);
  const RunConfig c = RunConfig::for_profile("desk");
  const auto oracle = evaluate(oracle_predictor(items), items, c.train.decode, c.train.metrics);
  CHECK(oracle.sap.at(10) == doctest::Approx(1.0));
  CHECK(oracle.f_h > 0.9);

  LineModel m(c.model, 0);
  const auto a = evaluate(m, items, c.train.decode, c.train.metrics);
  const auto b = evaluate(m, items, c.train.decode, c.train.metrics);
  CHECK(a.sap.at(10) < 0.05);
  CHECK(a.to_json() == b.to_json());
}
