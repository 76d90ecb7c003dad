// Copyright 2026 The CSA-EO Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <stdexcept>

#include "csaeo/metrics.hpp"
#include "csaeo/pipeline.hpp"

using namespace csaeo;
using namespace csaeo::pipeline;

namespace {

struct World {
  data::LabeledDataset train_set;
  data::LabeledDataset stream;
  dtjscc::Codec codec;

  World() {
    data::SyntheticSpec spec;
    spec.height = 16;
    spec.width = 16;
    spec.n_per_class = 40;
    spec.noise_level = 0.3;
    spec.seed = 4;
    auto ds = data::generate_synthetic(spec);
    std::tie(train_set, stream) = data::stratified_split(ds, 0.5, 4);
    data::shuffle(stream, 8);
    dtjscc::CodecShape shape;
    shape.height = 16;
    shape.width = 16;
    Rng rng(5);
    codec = dtjscc::make_codec(shape, rng);
    dtjscc::TrainConfig cfg;
    cfg.epochs = 10;
    dtjscc::train(codec, train_set, cfg, rng);
  }
};

const World& world() {
  static const World w;
  return w;
}

ScenarioConfig base_config() {
  ScenarioConfig cfg;
  cfg.batch_size = 16;
  cfg.n_timesteps = max_timesteps(world().stream.size(), cfg.batch_size);
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("zero timesteps give an empty report") {
  auto cfg = base_config();
  cfg.n_timesteps = 0;
  auto models = make_models(world().codec, 1, nullptr);
  const std::vector<dtjscc::Vector> stats;
  const std::vector<int> labels;
  CHECK(run_episode(cfg, models, stats, labels).empty());
  CHECK(max_timesteps(100, 16) == 5);
}

TEST_CASE("perfect links relay losslessly") {
  auto cfg = base_config();
  cfg.isl.perfect = true;
  cfg.downlink.perfect = true;
  cfg.csa_enabled = false;
  auto models = make_models(world().codec, 1, nullptr);
  const auto report = run_episode(cfg, models, world().stream);
  REQUIRE(report.size() == max_timesteps(world().stream.size(), 16));
  CHECK(report.all_ut_predictions() == report.all_sat2_predictions());
  CHECK(report.mean_relay_index_error() == 0.0);
  for (const auto& s : report.steps) {
    CHECK(s.isl_index_error == 0.0);
    CHECK(s.direct_index_error == 0.0);
  }
}

TEST_CASE("episodes are byte-identical for a fixed seed") {
  auto cfg = base_config();
  cfg.downlink.channel.kind = channel::FadingKind::LeoRician;
  cfg.frequency_offset_hz = 1e3;
  auto run = [&] {
    Rng rng(1);
    auto g = semaug::make_covariance_predictor(10, 64, rng);
    auto models = make_models(world().codec, 7, &g);
    return run_episode(cfg, models, world().stream).to_csv();
  };
  const auto a = run();
  CHECK(a == run());
  cfg.seed = 4;
  CHECK(a != run());
}

TEST_CASE("stream length is checked") {
  auto cfg = base_config();
  cfg.n_timesteps = 1000;
  auto models = make_models(world().codec, 1, nullptr);
  CHECK_THROWS_AS(run_episode(cfg, models, world().stream), std::invalid_argument);
}

TEST_CASE("downlink quality orders accuracy") {
  auto cfg = base_config();
  cfg.csa_enabled = false;
  double prev = -1.0;
  int violations = 0;
  for (double psnr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
    cfg.downlink.psnr_db = psnr;
    auto models = make_models(world().codec, 1, nullptr);
    const double acc = run_episode(cfg, models, world().stream).ut_top1();
    if (acc < prev) {
      ++violations;
      CHECK(prev - acc <= 0.02);
    }
    prev = acc;
  }
  CHECK(violations <= 1);
}

TEST_CASE("CSA comparison control and determinism") {
  auto cfg = base_config();
  cfg.downlink.psnr_db = 6.0;
  cfg.n_timesteps = 0;
  CompareOptions opts;
  opts.data.height = 16;
  opts.data.width = 16;
  opts.data.n_per_class = 20;
  opts.shape.height = 16;
  opts.shape.width = 16;
  opts.train.epochs = 5;
  opts.n_seeds = 1;
  opts.control = true;
  const auto control = compare_csa(cfg, opts);
  REQUIRE(control.class_names.size() == 10);
  for (std::size_t c = 0; c < 10; ++c) CHECK(control.csa[c] == control.non_csa[c]);

  opts.control = false;
  const auto a = compare_csa(cfg, opts);
  CHECK(a.to_csv() == compare_csa(cfg, opts).to_csv());
  std::size_t rows = 0;
  for (char ch : a.to_csv()) rows += ch == '\n' ? 1 : 0;
  CHECK(rows == 12);
}

TEST_CASE("per-class accuracy matches the confusion matrix") {
  auto cfg = base_config();
  cfg.csa_enabled = false;
  auto models = make_models(world().codec, 1, nullptr);
  const auto report = run_episode(cfg, models, world().stream);
  const auto pc = per_class_accuracy(report);
  const auto cm = metrics::confusion(report.all_ut_predictions(), report.all_labels(), 10);
  for (std::size_t c = 0; c < 10; ++c) CHECK(pc[c] == doctest::Approx(cm.class_accuracy(c)));
}

TEST_CASE("scenario validation") {
  auto cfg = base_config();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.constellation = "qpsk";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
