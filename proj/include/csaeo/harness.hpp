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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csaeo/config.hpp"
#include "csaeo/data.hpp"
#include "csaeo/dtjscc.hpp"
#include "csaeo/pipeline.hpp"

namespace csaeo::harness {

inline constexpr int kSchemaVersion = pipeline::kCsvSchemaVersion;

/// Bad invocation (e.g. an existing output directory without --overwrite); exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  std::vector<double> psnr_db{0.0, 4.0, 8.0, 12.0, 16.0};
  std::vector<std::size_t> k_q{32, 64, 128};
  std::vector<std::string> channels{"awgn", "rician"};
  std::vector<std::string> constellations{"16psk", "16apsk"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool csa_enabled = false;
  std::filesystem::path checkpoint_dir;

  void validate() const;
};

struct SerCurveSpec {
  std::vector<double> snr_db{0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0};
  std::size_t n_symbols = 200000;
};

struct ProbeSpec {
  std::vector<std::string> kinds{"awgn", "rician", "rayleigh", "leo_rician", "leo_rayleigh"};
  std::size_t n_draws = 100000;
};

struct Settings {
  std::uint64_t seed = 1;
  std::string data_source = "synthetic";
  std::filesystem::path data_path;
  data::SyntheticSpec data;
  double train_fraction = 0.5;
  dtjscc::CodecShape codec;
  /// Codebook sizes the train command produces, one checkpoint each.
  std::vector<std::size_t> train_k_q{16};
  dtjscc::TrainConfig train;
  /// Sets the training flip probability to the downlink's Monte-Carlo SER.
  bool channel_in_loop = false;
  bool predictor = true;
  std::size_t predictor_warmup_epochs = 5;
  pipeline::ScenarioConfig scenario;
  std::size_t compare_seeds = 5;
  bool compare_control = false;
  SweepSpec sweep;
  SerCurveSpec ser_curve;
  ProbeSpec probe;
};

/// Reads every section; unknown keys are errors. `seed_override` replaces run.seed.
Settings load_settings(const config::Document& doc, std::optional<std::uint64_t> seed_override = std::nullopt);
Settings load_settings(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt);

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::filesystem::path out = "out";
  bool overwrite = false;
  std::optional<std::filesystem::path> checkpoints;
};

struct TrainSummary {
  std::size_t k_q = 0;
  std::filesystem::path checkpoint;
  std::filesystem::path trace;
  double train_top1 = 0.0;
  double test_top1 = 0.0;
};

std::vector<TrainSummary> cmd_train(const CommandOptions& opts);
std::filesystem::path cmd_sweep(const CommandOptions& opts);
std::filesystem::path cmd_ser_curve(const CommandOptions& opts);
std::filesystem::path cmd_compare_csa(const CommandOptions& opts);
std::filesystem::path cmd_channel_probe(const CommandOptions& opts);

// Building blocks shared with the commands and the Python module.

/// Loads or generates the dataset, then splits it into (train, test).
std::pair<data::LabeledDataset, data::LabeledDataset> prepare_data(const Settings& s);

/// Codec shape for the dataset with the configured layer sizes and codebook size `k_q`.
dtjscc::CodecShape shape_for(const Settings& s, const data::LabeledDataset& ds, std::size_t k_q);

struct TrainedCodec {
  dtjscc::Codec codec;
  std::optional<semaug::CovariancePredictor> predictor;
  dtjscc::TrainingTrace trace;
};
TrainedCodec train_codec(const Settings& s, const data::LabeledDataset& train_set, std::size_t k_q);

std::filesystem::path checkpoint_name(std::size_t k_q);

/// Creates `dir`; refuses a non-empty existing directory unless overwrite is set.
void prepare_output_dir(const std::filesystem::path& dir, bool overwrite);

/// Shortest round-trip rendering of a double for CSV output.
std::string format_number(double v);

}  // namespace csaeo::harness
