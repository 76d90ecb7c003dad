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

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csaeo/channel.hpp"
#include "csaeo/data.hpp"
#include "csaeo/modem.hpp"
#include "csaeo/rng.hpp"

namespace csaeo::dtjscc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Per band: mean, standard deviation, mean |horizontal step|, mean |vertical step|.
inline constexpr std::size_t kStatsPerBand = 4;

Vector pooled_statistics(const data::MultispectralImage& image);

/// Number of 16-ary symbols needed to carry one index of a codebook with `codebook_size` entries.
std::size_t symbols_per_index(std::size_t codebook_size);

struct CodecShape {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t bands = 3;
  std::size_t n_classes = 10;
  std::size_t n_subvectors = 16;
  std::size_t subvector_dim = 4;
  std::size_t hidden = 64;
  std::size_t codebook_size = 16;

  std::size_t input_dim() const noexcept { return bands * kStatsPerBand; }
  std::size_t feature_dim() const noexcept { return n_subvectors * subvector_dim; }
  std::size_t symbols_per_image() const { return n_subvectors * symbols_per_index(codebook_size); }
  void validate() const;

  friend bool operator==(const CodecShape&, const CodecShape&) = default;
};

/// f: pooled statistics -> standardize -> tanh hidden layer -> linear features (A dims).
struct FeatureExtractor {
  Vector stat_mean;
  Vector stat_scale;
  Matrix w1;  // hidden x input
  Vector b1;
  Matrix w2;  // feature x hidden
  Vector b2;
  bool normalization_fitted = false;

  struct Activations {
    Vector input;   // standardized statistics
    Vector hidden;  // tanh outputs
    Vector feature;
  };

  Activations forward(const Vector& raw_stats) const;
  Vector features(const data::MultispectralImage& image) const { return forward(pooled_statistics(image)).feature; }
};

/// L codebooks of K codewords each; every codeword has subvector_dim entries.
struct Codebook {
  std::size_t n_subvectors = 0;
  std::size_t subvector_dim = 0;
  std::size_t size = 0;
  std::vector<Matrix> codewords;  // one K x dim matrix per sub-vector
  std::vector<Vector> ema_count;
  std::vector<Matrix> ema_sum;
  bool initialized = false;

  static Codebook zeros(std::size_t n_subvectors, std::size_t subvector_dim, std::size_t size);
};

struct ClassifierDecoder {
  Matrix weight;  // C x A
  Vector bias;    // C

  Vector logits(const Vector& features) const { return weight * features + bias; }
  std::size_t n_classes() const noexcept { return static_cast<std::size_t>(weight.rows()); }
};

struct Codec {
  CodecShape shape;
  FeatureExtractor extractor;
  Codebook codebook;
  ClassifierDecoder decoder;
};

/// Fresh codec with random weights; the codebook and input normalization are filled in by
/// initialize_from_data (called automatically by train).
Codec make_codec(const CodecShape& shape, Rng& rng);

/// Fits the input standardization and seeds the codebooks from features of random samples.
void initialize_from_data(Codec& codec, std::span<const Vector> raw_stats, Rng& rng);

/// Quantized feature indices for a batch of images, B x L in row-major order.
struct SemanticMessage {
  std::vector<std::uint16_t> indices;
  std::size_t batch_size = 0;
  std::size_t n_subvectors = 0;
  std::size_t codebook_size = 16;
  std::size_t n_classes = 0;
  std::size_t feature_dim = 0;

  std::span<const std::uint16_t> image(std::size_t b) const {
    return std::span<const std::uint16_t>(indices).subspan(b * n_subvectors, n_subvectors);
  }
  void validate() const;
  friend bool operator==(const SemanticMessage&, const SemanticMessage&) = default;
};

/// Nearest codeword per sub-vector, ties to the lowest index.
std::vector<std::uint16_t> quantize(const Vector& features, const Codebook& cb);
Vector dequantize(std::span<const std::uint16_t> indices, const Codebook& cb);

/// Throws std::invalid_argument on an image whose shape differs from the codec's.
SemanticMessage encode(const data::MultispectralImage& image, const Codec& codec);
SemanticMessage encode_batch(std::span<const data::MultispectralImage* const> images, const Codec& codec);
/// Encodes precomputed pooled statistics (one entry per image).
SemanticMessage encode_stats(std::span<const Vector> raw_stats, const Codec& codec);

/// Base-16 digits of each index, most significant first.
std::vector<modem::Symbol> to_symbols(const SemanticMessage& msg);
/// Inverse of to_symbols; digit combinations beyond the codebook wrap modulo its size.
SemanticMessage from_symbols(std::span<const modem::Symbol> symbols, const SemanticMessage& shape_of);

/// indices -> modulate -> y = H x + n -> equalize -> hard demap -> indices. One gain for the
/// whole message.
SemanticMessage transmit(const SemanticMessage& msg, const modem::Constellation& c,
                         const channel::ChannelInstance& inst, Rng& rng,
                         channel::Equalization eq = channel::Equalization::Perfect);

/// Variant with a gain per transmitted symbol (gains.size() == symbol count).
SemanticMessage transmit(const SemanticMessage& msg, const modem::Constellation& c,
                         std::span<const channel::Complex> gains, double noise_sigma, Rng& rng,
                         channel::Equalization eq = channel::Equalization::Perfect);

/// Replaces each transmitted symbol by a uniformly drawn different value with probability p.
SemanticMessage flip_symbols(const SemanticMessage& msg, double p, Rng& rng);

/// Dequantized decoder inputs, B x A.
Matrix dequantize_message(const SemanticMessage& msg, const Codebook& cb);

/// Logits per image, B x C.
Matrix decode(const SemanticMessage& msg, const Codebook& cb, const ClassifierDecoder& decoder);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 0.05;
  double momentum = 0.9;
  double commitment = 0.25;
  double ema_decay = 0.99;
  /// Symbol flip probability for channel-in-the-loop training.
  double flip_prob = 0.0;
  /// SA strength; 0 trains plain cross-entropy.
  double lambda_sa = 0.0;

  void validate() const;
};

/// Per epoch, measured after the epoch on noiseless quantized features in dataset order.
struct TrainingTrace {
  std::vector<double> loss;
  std::vector<double> accuracy;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TrainingTrace train(Codec& codec, const data::LabeledDataset& dataset, const TrainConfig& cfg, Rng& rng);
/// Same as train on precomputed pooled statistics.
TrainingTrace train_stats(Codec& codec, std::span<const Vector> raw_stats, std::span<const int> labels,
                          const TrainConfig& cfg, Rng& rng);

/// Noiseless local predictions (argmax of decode(encode(x)), ties to the lowest class).
std::vector<int> predict_stats(const Codec& codec, std::span<const Vector> raw_stats);

std::vector<Vector> pooled_dataset(const data::LabeledDataset& dataset);
std::vector<int> dataset_labels(const data::LabeledDataset& dataset);

/// Mean distance from each feature to its assigned codeword.
double quantization_error(const Codec& codec, std::span<const Vector> raw_stats);
double quantization_error(const Codec& codec, std::span<const Vector> raw_stats, const Codebook& cb);

// Gradient plumbing shared with the SA training step.

struct ExtractorGradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

/// d_features is N x A (row per sample), activations hold the forward pass of the same samples.
ExtractorGradients extractor_backward(const FeatureExtractor& f,
                                      std::span<const FeatureExtractor::Activations> activations,
                                      const Matrix& d_features);

}  // namespace csaeo::dtjscc
