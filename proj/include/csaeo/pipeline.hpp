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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csaeo/channel.hpp"
#include "csaeo/data.hpp"
#include "csaeo/dtjscc.hpp"
#include "csaeo/geometry.hpp"
#include "csaeo/linkbudget.hpp"
#include "csaeo/metrics.hpp"
#include "csaeo/modem.hpp"
#include "csaeo/semaug.hpp"

namespace csaeo::pipeline {

/// Leading column of every CSV artifact.
inline constexpr int kCsvSchemaVersion = 1;

using dtjscc::Matrix;
using dtjscc::Vector;

struct LinkConfig {
  channel::ChannelKind channel;
  double psnr_db = 10.0;
  /// Bypasses both fading and noise (H = 1, sigma = 0).
  bool perfect = false;

  void validate() const;
};

/// Default inter-satellite link: LoS-only Rician at high PSNR.
LinkConfig default_isl();
/// Default ground link: Rician with K = 2.8.
LinkConfig default_downlink();

struct ScenarioConfig {
  LinkConfig isl = default_isl();
  LinkConfig downlink = default_downlink();
  std::string constellation = "16psk";
  double apsk_gamma = modem::kDefaultApskGamma;
  channel::Equalization equalization = channel::Equalization::Perfect;
  /// Codebook size; 0 accepts whatever the models carry.
  std::size_t k_q = 0;
  bool csa_enabled = true;
  bool use_predictor = true;
  std::size_t n_timesteps = 0;
  std::size_t batch_size = 32;
  double symbol_period_s = 1e-6;
  double frequency_offset_hz = 0.0;
  geometry::GeometryParams geometry;
  geometry::SlantRangeMode slant_range_mode = geometry::SlantRangeMode::Geometric;
  linkbudget::LinkBudgetParams budget;
  semaug::SaStepConfig sat2_sa;
  semaug::SaStepConfig ut_sa{.lambda = 0.5, .lr = 0.2};
  std::uint64_t seed = 1;

  void validate() const;
};

/// Sat1, Sat2 and the user terminal, all starting from one trained codec.
struct Models {
  dtjscc::Codec sat1;
  dtjscc::Codec sat2;
  dtjscc::ClassifierDecoder ut;
  std::optional<semaug::CovariancePredictor> sat2_predictor;
  std::optional<semaug::CovariancePredictor> ut_predictor;
  semaug::ClassCovarianceBank sat2_bank;
  semaug::ClassCovarianceBank ut_bank;
};

/// Copies `base` into every node. Predictors start from `base_predictor` when given,
/// otherwise from a fresh seeded initialization.
Models make_models(const dtjscc::Codec& base, std::uint64_t seed,
                   const semaug::CovariancePredictor* base_predictor = nullptr);

struct TimestepRecord {
  std::size_t step = 0;
  std::vector<int> labels;      // labels of U(t_{i+1})
  std::vector<int> sat2_pred;   // Sat2 local inference on U(t_{i+1})
  std::vector<int> ut_pred;     // UT inference on the relayed message
  Matrix ut_logits;
  double isl_index_error = 0.0;
  double direct_index_error = 0.0;
  double relay_index_error = 0.0;
  double downlink_zeta_db = 0.0;
  double sat2_sa_loss = 0.0;
  double ut_sa_loss = 0.0;
};

struct EpisodeReport {
  std::vector<TimestepRecord> steps;
  std::size_t n_classes = 0;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  std::vector<int> all_labels() const;
  std::vector<int> all_ut_predictions() const;
  std::vector<int> all_sat2_predictions() const;
  double ut_top1() const;
  double sat2_top1() const;
  double mean_relay_index_error() const;

  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
  std::string summary() const;
};

/// Relay loop over n_timesteps + 1 consecutive batches of `stats`/`labels`.
EpisodeReport run_episode(const ScenarioConfig& cfg, Models& models, std::span<const Vector> stats,
                          std::span<const int> labels);
EpisodeReport run_episode(const ScenarioConfig& cfg, Models& models, const data::LabeledDataset& stream);

/// Largest n the stream supports at the configured batch size.
std::size_t max_timesteps(std::size_t stream_size, std::size_t batch_size);

/// Sends `msg` over one link. `link_id` and `step` key the random streams so that paired runs
/// see the same fading and noise.
struct LinkOutcome {
  dtjscc::SemanticMessage received;
  double index_error = 0.0;
  double zeta_db = 0.0;
};
LinkOutcome send_over_link(const dtjscc::SemanticMessage& msg, const LinkConfig& link, const ScenarioConfig& cfg,
                           const modem::Constellation& constellation, std::uint64_t link_id, std::size_t step);

/// Monte-Carlo symbol error rate of a link (fading per block of `block` symbols).
double estimate_symbol_error_rate(const LinkConfig& link, const modem::Constellation& constellation,
                                  channel::Equalization eq, std::size_t n_symbols, std::size_t block,
                                  std::uint64_t seed);

struct CompareOptions {
  data::SyntheticSpec data;
  /// Layer sizes; input dimensions and class count are taken from the data.
  dtjscc::CodecShape shape;
  dtjscc::TrainConfig train;
  double train_fraction = 0.5;
  std::size_t n_seeds = 5;
  /// Runs CSA in both columns (control).
  bool control = false;
};

struct CsaTable {
  std::vector<std::string> class_names;
  std::vector<double> csa;      // percent, per class, mean over seeds
  std::vector<double> non_csa;
  double csa_mean = 0.0;
  double non_csa_mean = 0.0;
  std::size_t n_seeds = 0;

  std::size_t classes_not_worse() const;
  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
};

/// Trains a base codec per seed and runs paired episodes with CSA on and off over identical
/// channel streams. With `dataset` null, a synthetic dataset is generated per seed.
CsaTable compare_csa(const ScenarioConfig& cfg, const CompareOptions& opts,
                     const data::LabeledDataset* dataset = nullptr);

/// Per-seed mean over the diagonal of the UT confusion matrix.
std::vector<double> per_class_accuracy(const EpisodeReport& report);

}  // namespace csaeo::pipeline
