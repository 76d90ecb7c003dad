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

#include "csaeo/semaug.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csaeo::semaug {

ClassCovarianceBank::ClassCovarianceBank(std::size_t n_classes, std::size_t feature_dim)
    : dim_(feature_dim),
      count_(n_classes, 0),
      mean_(n_classes, Vector::Zero(static_cast<Eigen::Index>(feature_dim))),
      m2_(n_classes, Vector::Zero(static_cast<Eigen::Index>(feature_dim))) {}

void ClassCovarianceBank::update(const Matrix& features, std::span<const int> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("feature rows must match label count");
  }
  if (labels.empty()) return;
  if (static_cast<std::size_t>(features.cols()) != dim_) throw std::invalid_argument("feature dimension mismatch");
  const std::size_t c_count = count_.size();
  std::vector<std::size_t> n(c_count, 0);
  std::vector<Vector> sum(c_count, Vector::Zero(static_cast<Eigen::Index>(dim_)));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= c_count) throw std::invalid_argument("label out of range");
    ++n[static_cast<std::size_t>(y)];
    sum[static_cast<std::size_t>(y)] += features.row(static_cast<Eigen::Index>(i)).transpose();
  }
  std::vector<Vector> batch_m2(c_count, Vector::Zero(static_cast<Eigen::Index>(dim_)));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    const Vector d = features.row(static_cast<Eigen::Index>(i)).transpose() - sum[c] / static_cast<double>(n[c]);
    batch_m2[c] += d.cwiseProduct(d);
  }
  // Chan et al. pairwise merge of (count, mean, M2).
  for (std::size_t c = 0; c < c_count; ++c) {
    if (n[c] == 0) continue;
    const double na = static_cast<double>(count_[c]);
    const double nb = static_cast<double>(n[c]);
    const Vector mean_b = sum[c] / nb;
    const Vector delta = mean_b - mean_[c];
    const double total = na + nb;
    mean_[c] += delta * (nb / total);
    m2_[c] += batch_m2[c] + delta.cwiseProduct(delta) * (na * nb / total);
    count_[c] += n[c];
  }
}

SaStepConfig SaStepConfig::at_step(std::size_t step) const {
  SaStepConfig out = *this;
  if (lambda_ramp_steps > 0 && step < lambda_ramp_steps) {
    out.lambda = lambda * static_cast<double>(step + 1) / static_cast<double>(lambda_ramp_steps);
  }
  return out;
}

Vector ClassCovarianceBank::variance(std::size_t c) const {
  if (count_.at(c) == 0) return Vector::Zero(static_cast<Eigen::Index>(dim_));
  return m2_[c] / static_cast<double>(count_[c]);
}

Matrix ClassCovarianceBank::variances() const {
  Matrix out(static_cast<Eigen::Index>(count_.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t c = 0; c < count_.size(); ++c) out.row(static_cast<Eigen::Index>(c)) = variance(c).transpose();
  return out;
}

Matrix CovariancePredictor::predict(const Vector& features) const {
  const Vector pre = weight * features + bias;
  Matrix out(static_cast<Eigen::Index>(n_classes), static_cast<Eigen::Index>(feature_dim));
  for (std::size_t c = 0; c < n_classes; ++c) {
    out.row(static_cast<Eigen::Index>(c)) =
        pre.segment(static_cast<Eigen::Index>(c * feature_dim), static_cast<Eigen::Index>(feature_dim))
            .cwiseAbs2()
            .transpose();
  }
  return out;
}

Vector CovariancePredictor::predict_class(const Vector& features, std::size_t c) const {
  const auto off = static_cast<Eigen::Index>(c * feature_dim);
  const auto dim = static_cast<Eigen::Index>(feature_dim);
  const Vector pre = weight.middleRows(off, dim) * features + bias.segment(off, dim);
  return pre.cwiseAbs2();
}

CovariancePredictor make_covariance_predictor(std::size_t n_classes, std::size_t feature_dim, Rng& rng,
                                              double init_scale) {
  CovariancePredictor g;
  g.n_classes = n_classes;
  g.feature_dim = feature_dim;
  const auto rows = static_cast<Eigen::Index>(n_classes * feature_dim);
  const auto cols = static_cast<Eigen::Index>(feature_dim);
  std::normal_distribution<double> normal(0.0, init_scale);
  g.weight.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) g.weight(i, j) = normal(rng);
  }
  g.bias = Vector::Zero(rows);
  return g;
}

SaResult sa_loss_and_gradients(const Matrix& features, std::span<const int> labels,
                               const dtjscc::ClassifierDecoder& decoder, const Matrix& sigma, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const auto n = features.rows();
  const auto a_dim = features.cols();
  const auto c_dim = decoder.weight.rows();
  if (static_cast<std::size_t>(n) != labels.size()) throw std::invalid_argument("feature rows must match labels");
  if (n == 0) throw std::invalid_argument("empty batch");
  if (decoder.weight.cols() != a_dim) throw std::invalid_argument("decoder/feature dimension mismatch");
  if (sigma.rows() != n || sigma.cols() != a_dim) throw std::invalid_argument("sigma must be N x A");
  if (!features.allFinite() || !sigma.allFinite()) throw std::invalid_argument("non-finite SA loss input");

  SaResult r;
  r.d_weight = Matrix::Zero(c_dim, a_dim);
  r.d_bias = Vector::Zero(c_dim);
  r.d_features = Matrix::Zero(n, a_dim);
  r.d_sigma = Matrix::Zero(n, a_dim);
  const double inv_n = 1.0 / static_cast<double>(n);

  Vector z(c_dim);
  Vector p(c_dim);
  Matrix delta(c_dim, a_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= c_dim) throw std::invalid_argument("label out of range: " + std::to_string(y));
    const Vector a = features.row(i).transpose();
    const Vector s = sigma.row(i).transpose();
    z = decoder.weight * a + decoder.bias;
    if (lambda > 0.0) {
      delta = decoder.weight.rowwise() - decoder.weight.row(y);
      z += (0.5 * lambda) * (delta.cwiseAbs2() * s);
    }
    const double zmax = z.maxCoeff();
    p = (z.array() - zmax).exp();
    const double total = p.sum();
    p /= total;
    r.loss += (zmax + std::log(total) - z(y)) * inv_n;

    Vector g = p * inv_n;
    g(y) -= inv_n;
    r.d_bias += g;
    r.d_weight.noalias() += g * a.transpose();
    r.d_features.row(i) = (decoder.weight.transpose() * g).transpose();
    if (lambda > 0.0) {
      for (Eigen::Index j = 0; j < c_dim; ++j) {
        if (j == y) continue;
        const Eigen::RowVectorXd push = (lambda * g(j)) * delta.row(j).cwiseProduct(s.transpose());
        r.d_weight.row(j) += push;
        r.d_weight.row(y) -= push;
        r.d_sigma.row(i) += (0.5 * lambda * g(j)) * delta.row(j).cwiseAbs2();
      }
    }
  }
  if (!std::isfinite(r.loss)) throw std::invalid_argument("SA loss is not finite");
  return r;
}

double sa_loss(const Matrix& features, std::span<const int> labels, const dtjscc::ClassifierDecoder& decoder,
               const Matrix& sigma, double lambda) {
  return sa_loss_and_gradients(features, labels, decoder, sigma, lambda).loss;
}

double sa_loss(const Matrix& features, std::span<const int> labels, const dtjscc::ClassifierDecoder& decoder,
               const ClassCovarianceBank& bank, double lambda) {
  const Matrix sigma = blended_sigma(features, labels, nullptr, bank, 0.0);
  return sa_loss(features, labels, decoder, sigma, lambda);
}

double cross_entropy(const Matrix& features, std::span<const int> labels, const dtjscc::ClassifierDecoder& decoder) {
  return sa_loss(features, labels, decoder, Matrix::Zero(features.rows(), features.cols()), 0.0);
}

Matrix blended_sigma(const Matrix& conditioning, std::span<const int> labels, const CovariancePredictor* predictor,
                     const ClassCovarianceBank& bank, double blend) {
  if (!(blend >= 0.0 && blend <= 1.0)) throw std::invalid_argument("blend must lie in [0, 1]");
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix sigma(n, static_cast<Eigen::Index>(bank.feature_dim()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    Vector s = bank.variance(y);
    if (predictor != nullptr && blend > 0.0) {
      s = blend * predictor->predict_class(conditioning.row(i).transpose(), y) + (1.0 - blend) * s;
    }
    sigma.row(i) = s.transpose();
  }
  return sigma;
}

double update_predictor(CovariancePredictor& predictor, const Matrix& conditioning, std::span<const int> labels,
                        const ClassCovarianceBank& bank, const Matrix& d_sigma, const SaStepConfig& cfg) {
  const auto n = conditioning.rows();
  const auto dim = static_cast<Eigen::Index>(predictor.feature_dim);
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix d_weight = Matrix::Zero(predictor.weight.rows(), predictor.weight.cols());
  Vector d_bias = Vector::Zero(predictor.bias.size());
  double regression = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    const auto off = static_cast<Eigen::Index>(y) * dim;
    const Vector c = conditioning.row(i).transpose();
    const Vector pre = predictor.weight.middleRows(off, dim) * c + predictor.bias.segment(off, dim);
    const Vector predicted = pre.cwiseAbs2();
    const Vector err = predicted - bank.variance(y);
    regression += err.squaredNorm() * inv_n;
    const Vector d_pred =
        (1.0 - cfg.predictor_sa_weight) * 2.0 * inv_n * err +
        cfg.predictor_sa_weight * cfg.blend * d_sigma.row(i).transpose();
    const Vector d_pre = 2.0 * pre.cwiseProduct(d_pred);
    d_weight.middleRows(off, dim).noalias() += d_pre * c.transpose();
    d_bias.segment(off, dim) += d_pre;
  }
  predictor.weight -= cfg.predictor_lr * d_weight;
  predictor.bias -= cfg.predictor_lr * d_bias;
  return regression;
}

SaStepResult sa_decoder_step(dtjscc::ClassifierDecoder& decoder, CovariancePredictor* predictor,
                             ClassCovarianceBank& bank, const Matrix& features, std::span<const int> labels,
                             const Matrix& conditioning, const SaStepConfig& cfg) {
  bank.update(conditioning, labels);
  const Matrix sigma = blended_sigma(conditioning, labels, predictor, bank, cfg.blend);
  const SaResult r = sa_loss_and_gradients(features, labels, decoder, sigma, cfg.lambda);
  decoder.weight -= cfg.lr * r.d_weight;
  decoder.bias -= cfg.lr * r.d_bias;
  SaStepResult out;
  out.loss = r.loss;
  if (predictor != nullptr) out.predictor_loss = update_predictor(*predictor, conditioning, labels, bank, r.d_sigma, cfg);
  return out;
}

SaStepResult sa_train_step(dtjscc::Codec& codec, CovariancePredictor* predictor, ClassCovarianceBank& bank,
                           std::span<const Vector> raw_stats, std::span<const int> labels,
                           const Matrix& conditioning, const SaStepConfig& cfg) {
  if (raw_stats.size() != labels.size()) throw std::invalid_argument("batch size mismatch");
  const auto n = static_cast<Eigen::Index>(raw_stats.size());
  const auto a_dim = static_cast<Eigen::Index>(codec.shape.feature_dim());
  std::vector<dtjscc::FeatureExtractor::Activations> acts;
  acts.reserve(raw_stats.size());
  Matrix quantized(n, a_dim);
  Matrix continuous(n, a_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    acts.push_back(codec.extractor.forward(raw_stats[static_cast<std::size_t>(i)]));
    continuous.row(i) = acts.back().feature.transpose();
    quantized.row(i) = dtjscc::dequantize(dtjscc::quantize(acts.back().feature, codec.codebook), codec.codebook).transpose();
  }

  bank.update(conditioning, labels);
  const Matrix sigma = blended_sigma(conditioning, labels, predictor, bank, cfg.blend);
  const SaResult r = sa_loss_and_gradients(quantized, labels, codec.decoder, sigma, cfg.lambda);

  // Straight-through: the decoder-input gradient is the feature gradient.
  Matrix d_features = r.d_features + (2.0 * cfg.commitment / static_cast<double>(n)) * (continuous - quantized);
  const dtjscc::ExtractorGradients eg = dtjscc::extractor_backward(codec.extractor, acts, d_features);
  codec.extractor.w1 -= cfg.lr * eg.w1;
  codec.extractor.b1 -= cfg.lr * eg.b1;
  codec.extractor.w2 -= cfg.lr * eg.w2;
  codec.extractor.b2 -= cfg.lr * eg.b2;
  codec.decoder.weight -= cfg.lr * r.d_weight;
  codec.decoder.bias -= cfg.lr * r.d_bias;

  SaStepResult out;
  out.loss = r.loss;
  if (predictor != nullptr) out.predictor_loss = update_predictor(*predictor, conditioning, labels, bank, r.d_sigma, cfg);
  if (!std::isfinite(out.loss) || !codec.decoder.weight.allFinite() || !codec.extractor.w2.allFinite()) {
    throw dtjscc::TrainingDiverged("SA step produced non-finite parameters");
  }
  return out;
}

}  // namespace csaeo::semaug
