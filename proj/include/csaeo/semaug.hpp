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

#include <span>
#include <vector>

#include "csaeo/dtjscc.hpp"
#include "csaeo/rng.hpp"

namespace csaeo::semaug {

using dtjscc::Matrix;
using dtjscc::Vector;

/// Streaming per-class mean and diagonal (population) variance of feature vectors.
class ClassCovarianceBank {
 public:
  ClassCovarianceBank() = default;
  ClassCovarianceBank(std::size_t n_classes, std::size_t feature_dim);

  /// features is N x A; rows with labels outside [0, C) throw.
  void update(const Matrix& features, std::span<const int> labels);

  std::size_t n_classes() const noexcept { return count_.size(); }
  std::size_t feature_dim() const noexcept { return dim_; }
  std::size_t count(std::size_t c) const { return count_.at(c); }
  const Vector& mean(std::size_t c) const { return mean_.at(c); }
  /// Zero for classes with fewer than two samples' worth of spread.
  Vector variance(std::size_t c) const;
  /// C x A.
  Matrix variances() const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> count_;
  std::vector<Vector> mean_;
  std::vector<Vector> m2_;
};

/// g: received features -> per-class diagonal covariances, squared so they stay nonnegative.
struct CovariancePredictor {
  Matrix weight;  // (C*A) x A
  Vector bias;    // C*A
  std::size_t n_classes = 0;
  std::size_t feature_dim = 0;

  /// C x A, elementwise >= 0.
  Matrix predict(const Vector& features) const;
  Vector predict_class(const Vector& features, std::size_t c) const;
};

CovariancePredictor make_covariance_predictor(std::size_t n_classes, std::size_t feature_dim, Rng& rng,
                                              double init_scale = 0.01);

/// Per-batch SA loss and its gradients. sigma holds one diagonal covariance per sample
/// (N x A, the covariance of that sample's class).
struct SaResult {
  double loss = 0.0;
  Matrix d_weight;    // C x A
  Vector d_bias;      // C
  Matrix d_features;  // N x A
  Matrix d_sigma;     // N x A
};

SaResult sa_loss_and_gradients(const Matrix& features, std::span<const int> labels,
                               const dtjscc::ClassifierDecoder& decoder, const Matrix& sigma, double lambda);

/// Mean over the batch of -log softmax of the augmented logits
///   z_j + (lambda / 2) (w_j - w_y)^T Sigma_y (w_j - w_y).
double sa_loss(const Matrix& features, std::span<const int> labels, const dtjscc::ClassifierDecoder& decoder,
               const ClassCovarianceBank& bank, double lambda);

double sa_loss(const Matrix& features, std::span<const int> labels, const dtjscc::ClassifierDecoder& decoder,
               const Matrix& sigma, double lambda);

double cross_entropy(const Matrix& features, std::span<const int> labels, const dtjscc::ClassifierDecoder& decoder);

/// Sigma row per sample: blend * g(conditioning_i)[y_i] + (1 - blend) * bank[y_i]. A null
/// predictor uses the bank alone.
Matrix blended_sigma(const Matrix& conditioning, std::span<const int> labels, const CovariancePredictor* predictor,
                     const ClassCovarianceBank& bank, double blend);

struct SaStepConfig {
  double lambda = 0.5;
  double lr = 0.01;
  double blend = 0.5;
  double predictor_lr = 0.01;
  /// Weight of the SA loss in the predictor objective (the rest is regression to the bank).
  double predictor_sa_weight = 0.1;
  double commitment = 0.25;
  /// Linear warm-up of lambda over this many steps; 0 keeps it constant.
  std::size_t lambda_ramp_steps = 0;

  /// Copy with lambda scaled for the given 0-based step.
  SaStepConfig at_step(std::size_t step) const;
};

struct SaStepResult {
  double loss = 0.0;
  double predictor_loss = 0.0;
};

/// One alternating step: update the bank with the conditioning features, take a gradient
/// step on f and l with Sigma frozen, then a step on g (when non-null).
/// raw_stats are the images that f encodes; conditioning (N x A) are the received features.
SaStepResult sa_train_step(dtjscc::Codec& codec, CovariancePredictor* predictor, ClassCovarianceBank& bank,
                           std::span<const Vector> raw_stats, std::span<const int> labels,
                           const Matrix& conditioning, const SaStepConfig& cfg);

/// Receiver-only variant: the decoder consumes `features` directly (no extractor).
SaStepResult sa_decoder_step(dtjscc::ClassifierDecoder& decoder, CovariancePredictor* predictor,
                             ClassCovarianceBank& bank, const Matrix& features, std::span<const int> labels,
                             const Matrix& conditioning, const SaStepConfig& cfg);

double update_predictor(CovariancePredictor& predictor, const Matrix& conditioning, std::span<const int> labels,
                        const ClassCovarianceBank& bank, const Matrix& d_sigma, const SaStepConfig& cfg);

}  // namespace csaeo::semaug
