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

#include "csaeo/dtjscc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csaeo/semaug.hpp"

namespace csaeo::dtjscc {
namespace {

constexpr double kScaleFloor = 1e-8;
constexpr double kLaplaceEps = 1e-5;

void fill_normal(Matrix& m, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
}

void check_shape(const data::MultispectralImage& image, const CodecShape& shape) {
  if (image.height() != shape.height || image.width() != shape.width || image.bands() != shape.bands) {
    std::ostringstream os;
    os << "image shape " << image.height() << "x" << image.width() << "x" << image.bands()
       << " does not match codec input " << shape.height << "x" << shape.width << "x" << shape.bands;
    throw std::invalid_argument(os.str());
  }
}

SemanticMessage empty_message(const Codec& codec, std::size_t batch) {
  SemanticMessage msg;
  msg.batch_size = batch;
  msg.n_subvectors = codec.shape.n_subvectors;
  msg.codebook_size = codec.shape.codebook_size;
  msg.n_classes = codec.shape.n_classes;
  msg.feature_dim = codec.shape.feature_dim();
  msg.indices.reserve(batch * msg.n_subvectors);
  return msg;
}

int argmax_row(const Matrix& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j) {
    if (m(row, j) > m(row, best)) best = j;
  }
  return static_cast<int>(best);
}

struct Momentum {
  Matrix w1, w2, dec_w;
  Vector b1, b2, dec_b;

  explicit Momentum(const Codec& c)
      : w1(Matrix::Zero(c.extractor.w1.rows(), c.extractor.w1.cols())),
        w2(Matrix::Zero(c.extractor.w2.rows(), c.extractor.w2.cols())),
        dec_w(Matrix::Zero(c.decoder.weight.rows(), c.decoder.weight.cols())),
        b1(Vector::Zero(c.extractor.b1.size())),
        b2(Vector::Zero(c.extractor.b2.size())),
        dec_b(Vector::Zero(c.decoder.bias.size())) {}
};

template <typename T>
void momentum_step(T& param, T& velocity, const T& grad, double mu, double lr) {
  velocity = mu * velocity + grad;
  param -= lr * velocity;
}

void ema_update(Codebook& cb, const Matrix& features, const std::vector<std::vector<std::uint16_t>>& assigned,
                double decay) {
  const auto dim = static_cast<Eigen::Index>(cb.subvector_dim);
  for (std::size_t l = 0; l < cb.n_subvectors; ++l) {
    Vector counts = Vector::Zero(static_cast<Eigen::Index>(cb.size));
    Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(cb.size), dim);
    for (std::size_t i = 0; i < assigned.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(assigned[i][l]);
      counts(k) += 1.0;
      sums.row(k) += features.row(static_cast<Eigen::Index>(i)).segment(static_cast<Eigen::Index>(l) * dim, dim);
    }
    cb.ema_count[l] = decay * cb.ema_count[l] + (1.0 - decay) * counts;
    cb.ema_sum[l] = decay * cb.ema_sum[l] + (1.0 - decay) * sums;
    const double total = cb.ema_count[l].sum();
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(cb.size); ++k) {
      const double smoothed =
          (cb.ema_count[l](k) + kLaplaceEps) / (total + static_cast<double>(cb.size) * kLaplaceEps) * total;
      cb.codewords[l].row(k) = cb.ema_sum[l].row(k) / smoothed;
    }
  }
}

}  // namespace

Vector pooled_statistics(const data::MultispectralImage& image) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const std::size_t d = image.bands();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(d * kStatsPerBand));
  const double n = static_cast<double>(h * w);
  for (std::size_t b = 0; b < d; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) sum += image.at(i, j, b);
    }
    const double mean = sum / n;
    double sq = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const double v = image.at(i, j, b);
        sq += (v - mean) * (v - mean);
        if (j + 1 < w) dx += std::abs(static_cast<double>(image.at(i, j + 1, b)) - v);
        if (i + 1 < h) dy += std::abs(static_cast<double>(image.at(i + 1, j, b)) - v);
      }
    }
    const auto base = static_cast<Eigen::Index>(b * kStatsPerBand);
    out(base) = mean;
    out(base + 1) = std::sqrt(sq / n);
    out(base + 2) = w > 1 ? dx / static_cast<double>(h * (w - 1)) : 0.0;
    out(base + 3) = h > 1 ? dy / static_cast<double>((h - 1) * w) : 0.0;
  }
  return out;
}

std::size_t symbols_per_index(std::size_t codebook_size) {
  if (codebook_size < 2) throw std::invalid_argument("codebook needs at least 2 codewords");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < codebook_size) ++bits;
  return std::max<std::size_t>(1, (bits + 3) / 4);
}

void CodecShape::validate() const {
  if (height == 0 || width == 0 || bands == 0) throw std::invalid_argument("codec input dimensions must be >= 1");
  if (n_classes < 2) throw std::invalid_argument("codec needs at least 2 classes");
  if (n_subvectors == 0 || subvector_dim == 0 || hidden == 0) throw std::invalid_argument("codec layer sizes must be >= 1");
  if (codebook_size < 2 || codebook_size > 65536) throw std::invalid_argument("codebook size must lie in [2, 65536]");
}

FeatureExtractor::Activations FeatureExtractor::forward(const Vector& raw_stats) const {
  Activations a;
  if (normalization_fitted) {
    a.input = (raw_stats - stat_mean).cwiseQuotient(stat_scale);
  } else {
    a.input = raw_stats;
  }
  a.hidden = (w1 * a.input + b1).array().tanh().matrix();
  a.feature = w2 * a.hidden + b2;
  return a;
}

Codebook Codebook::zeros(std::size_t n_subvectors, std::size_t subvector_dim, std::size_t size) {
  Codebook cb;
  cb.n_subvectors = n_subvectors;
  cb.subvector_dim = subvector_dim;
  cb.size = size;
  const auto k = static_cast<Eigen::Index>(size);
  const auto d = static_cast<Eigen::Index>(subvector_dim);
  cb.codewords.assign(n_subvectors, Matrix::Zero(k, d));
  cb.ema_count.assign(n_subvectors, Vector::Ones(k));
  cb.ema_sum.assign(n_subvectors, Matrix::Zero(k, d));
  return cb;
}

Codec make_codec(const CodecShape& shape, Rng& rng) {
  shape.validate();
  Codec c;
  c.shape = shape;
  const auto in = static_cast<Eigen::Index>(shape.input_dim());
  const auto hid = static_cast<Eigen::Index>(shape.hidden);
  const auto feat = static_cast<Eigen::Index>(shape.feature_dim());
  const auto cls = static_cast<Eigen::Index>(shape.n_classes);
  c.extractor.stat_mean = Vector::Zero(in);
  c.extractor.stat_scale = Vector::Ones(in);
  c.extractor.w1.resize(hid, in);
  fill_normal(c.extractor.w1, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  c.extractor.b1 = Vector::Zero(hid);
  c.extractor.w2.resize(feat, hid);
  fill_normal(c.extractor.w2, 1.0 / std::sqrt(static_cast<double>(hid)), rng);
  c.extractor.b2 = Vector::Zero(feat);
  c.codebook = Codebook::zeros(shape.n_subvectors, shape.subvector_dim, shape.codebook_size);
  c.decoder.weight.resize(cls, feat);
  fill_normal(c.decoder.weight, 1.0 / std::sqrt(static_cast<double>(feat)), rng);
  c.decoder.bias = Vector::Zero(cls);
  return c;
}

void initialize_from_data(Codec& codec, std::span<const Vector> raw_stats, Rng& rng) {
  if (raw_stats.empty()) throw std::invalid_argument("cannot initialize a codec from an empty dataset");
  const auto in = static_cast<Eigen::Index>(codec.shape.input_dim());
  const double n = static_cast<double>(raw_stats.size());
  Vector mean = Vector::Zero(in);
  for (const auto& s : raw_stats) {
    if (s.size() != in) throw std::invalid_argument("pooled statistics do not match codec input");
    mean += s;
  }
  mean /= n;
  Vector var = Vector::Zero(in);
  for (const auto& s : raw_stats) var += (s - mean).cwiseAbs2();
  var /= n;
  codec.extractor.stat_mean = mean;
  codec.extractor.stat_scale = var.cwiseSqrt().unaryExpr([](double v) { return v > kScaleFloor ? v : 1.0; });
  codec.extractor.normalization_fitted = true;

  const std::size_t k = codec.shape.codebook_size;
  const auto dim = static_cast<Eigen::Index>(codec.shape.subvector_dim);
  Codebook& cb = codec.codebook;
  cb = Codebook::zeros(codec.shape.n_subvectors, codec.shape.subvector_dim, k);
  std::vector<std::size_t> order(raw_stats.size());
  std::normal_distribution<double> jitter(0.0, 1e-3);
  for (std::size_t l = 0; l < cb.n_subvectors; ++l) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (std::size_t j = 0; j < k; ++j) {
      const Vector f = codec.extractor.forward(raw_stats[order[j % order.size()]]).feature;
      for (Eigen::Index d = 0; d < dim; ++d) {
        cb.codewords[l](static_cast<Eigen::Index>(j), d) = f(static_cast<Eigen::Index>(l) * dim + d) + jitter(rng);
      }
    }
    cb.ema_sum[l] = cb.codewords[l];
  }
  cb.initialized = true;
}

void SemanticMessage::validate() const {
  if (indices.size() != batch_size * n_subvectors) throw std::invalid_argument("message index count mismatch");
  for (auto i : indices) {
    if (i >= codebook_size) throw std::invalid_argument("message index out of codebook range");
  }
}

std::vector<std::uint16_t> quantize(const Vector& features, const Codebook& cb) {
  const auto dim = static_cast<Eigen::Index>(cb.subvector_dim);
  if (features.size() != static_cast<Eigen::Index>(cb.n_subvectors) * dim) {
    throw std::invalid_argument("feature length does not match codebook layout");
  }
  std::vector<std::uint16_t> out(cb.n_subvectors);
  for (std::size_t l = 0; l < cb.n_subvectors; ++l) {
    const auto sub = features.segment(static_cast<Eigen::Index>(l) * dim, dim);
    const Matrix& words = cb.codewords[l];
    std::uint16_t best = 0;
    double best_d = (words.row(0).transpose() - sub).squaredNorm();
    for (Eigen::Index k = 1; k < words.rows(); ++k) {
      const double d = (words.row(k).transpose() - sub).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::uint16_t>(k);
      }
    }
    out[l] = best;
  }
  return out;
}

Vector dequantize(std::span<const std::uint16_t> indices, const Codebook& cb) {
  if (indices.size() != cb.n_subvectors) throw std::invalid_argument("index count does not match codebook");
  const auto dim = static_cast<Eigen::Index>(cb.subvector_dim);
  Vector out(static_cast<Eigen::Index>(cb.n_subvectors) * dim);
  for (std::size_t l = 0; l < cb.n_subvectors; ++l) {
    if (indices[l] >= cb.size) throw std::invalid_argument("codeword index out of range");
    out.segment(static_cast<Eigen::Index>(l) * dim, dim) = cb.codewords[l].row(indices[l]).transpose();
  }
  return out;
}

SemanticMessage encode_stats(std::span<const Vector> raw_stats, const Codec& codec) {
  SemanticMessage msg = empty_message(codec, raw_stats.size());
  for (const auto& s : raw_stats) {
    const auto idx = quantize(codec.extractor.forward(s).feature, codec.codebook);
    msg.indices.insert(msg.indices.end(), idx.begin(), idx.end());
  }
  return msg;
}

SemanticMessage encode(const data::MultispectralImage& image, const Codec& codec) {
  const data::MultispectralImage* one[] = {&image};
  return encode_batch(one, codec);
}

SemanticMessage encode_batch(std::span<const data::MultispectralImage* const> images, const Codec& codec) {
  std::vector<Vector> stats;
  stats.reserve(images.size());
  for (const auto* img : images) {
    check_shape(*img, codec.shape);
    stats.push_back(pooled_statistics(*img));
  }
  return encode_stats(stats, codec);
}

std::vector<modem::Symbol> to_symbols(const SemanticMessage& msg) {
  const std::size_t per = symbols_per_index(msg.codebook_size);
  std::vector<modem::Symbol> out;
  out.reserve(msg.indices.size() * per);
  for (auto idx : msg.indices) {
    for (std::size_t d = per; d-- > 0;) out.push_back(static_cast<modem::Symbol>((idx >> (4 * d)) & 0xF));
  }
  return out;
}

SemanticMessage from_symbols(std::span<const modem::Symbol> symbols, const SemanticMessage& shape_of) {
  const std::size_t per = symbols_per_index(shape_of.codebook_size);
  if (symbols.size() != shape_of.indices.size() * per) throw std::invalid_argument("symbol count mismatch");
  SemanticMessage out = shape_of;
  for (std::size_t i = 0; i < out.indices.size(); ++i) {
    std::size_t v = 0;
    for (std::size_t d = 0; d < per; ++d) v = (v << 4) | (symbols[i * per + d] & 0xF);
    out.indices[i] = static_cast<std::uint16_t>(v % shape_of.codebook_size);
  }
  return out;
}

SemanticMessage transmit(const SemanticMessage& msg, const modem::Constellation& c,
                         const channel::ChannelInstance& inst, Rng& rng, channel::Equalization eq) {
  const auto symbols = to_symbols(msg);
  const std::vector<channel::Complex> gains(symbols.size(), inst.gain);
  return transmit(msg, c, gains, inst.noise_sigma, rng, eq);
}

SemanticMessage transmit(const SemanticMessage& msg, const modem::Constellation& c,
                         std::span<const channel::Complex> gains, double noise_sigma, Rng& rng,
                         channel::Equalization eq) {
  msg.validate();
  const auto symbols = to_symbols(msg);
  const auto tx = modem::modulate(symbols, c);
  auto rx = channel::apply_channel(tx, gains, noise_sigma, rng);
  if (eq == channel::Equalization::Perfect) rx = channel::equalize(rx, gains);
  return from_symbols(modem::demodulate_hard(rx, c), msg);
}

SemanticMessage flip_symbols(const SemanticMessage& msg, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("flip probability must lie in [0, 1]");
  if (p == 0.0) return msg;
  auto symbols = to_symbols(msg);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> other(0, static_cast<int>(modem::kOrder) - 2);
  for (auto& s : symbols) {
    if (u(rng) < p) {
      const int o = other(rng);
      s = static_cast<modem::Symbol>(o >= s ? o + 1 : o);
    }
  }
  return from_symbols(symbols, msg);
}

Matrix dequantize_message(const SemanticMessage& msg, const Codebook& cb) {
  msg.validate();
  Matrix out(static_cast<Eigen::Index>(msg.batch_size), static_cast<Eigen::Index>(cb.n_subvectors * cb.subvector_dim));
  for (std::size_t b = 0; b < msg.batch_size; ++b) out.row(static_cast<Eigen::Index>(b)) = dequantize(msg.image(b), cb).transpose();
  return out;
}

Matrix decode(const SemanticMessage& msg, const Codebook& cb, const ClassifierDecoder& decoder) {
  const Matrix x = dequantize_message(msg, cb);
  Matrix logits = x * decoder.weight.transpose();
  logits.rowwise() += decoder.bias.transpose();
  return logits;
}

void TrainConfig::validate() const {
  if (epochs == 0 && lr < 0.0) throw std::invalid_argument("invalid training config");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw std::invalid_argument("lr must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw std::invalid_argument("ema_decay must lie in [0, 1)");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw std::invalid_argument("flip_prob must lie in [0, 1]");
  if (!(lambda_sa >= 0.0)) throw std::invalid_argument("lambda_sa must be >= 0");
  if (!(commitment >= 0.0)) throw std::invalid_argument("commitment must be >= 0");
}

ExtractorGradients extractor_backward(const FeatureExtractor& f,
                                      std::span<const FeatureExtractor::Activations> activations,
                                      const Matrix& d_features) {
  ExtractorGradients g;
  g.w1 = Matrix::Zero(f.w1.rows(), f.w1.cols());
  g.b1 = Vector::Zero(f.b1.size());
  g.w2 = Matrix::Zero(f.w2.rows(), f.w2.cols());
  g.b2 = Vector::Zero(f.b2.size());
  for (std::size_t i = 0; i < activations.size(); ++i) {
    const auto& act = activations[i];
    const Vector df = d_features.row(static_cast<Eigen::Index>(i)).transpose();
    g.w2.noalias() += df * act.hidden.transpose();
    g.b2 += df;
    const Vector dpre = (f.w2.transpose() * df).cwiseProduct((1.0 - act.hidden.array().square()).matrix());
    g.w1.noalias() += dpre * act.input.transpose();
    g.b1 += dpre;
  }
  return g;
}

std::vector<int> predict_stats(const Codec& codec, std::span<const Vector> raw_stats) {
  const SemanticMessage msg = encode_stats(raw_stats, codec);
  const Matrix logits = decode(msg, codec.codebook, codec.decoder);
  std::vector<int> out(raw_stats.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_row(logits, i);
  return out;
}

std::vector<Vector> pooled_dataset(const data::LabeledDataset& dataset) {
  std::vector<Vector> out;
  out.reserve(dataset.size());
  for (const auto& item : dataset.items) out.push_back(pooled_statistics(item.image));
  return out;
}

std::vector<int> dataset_labels(const data::LabeledDataset& dataset) {
  std::vector<int> out;
  out.reserve(dataset.size());
  for (const auto& item : dataset.items) out.push_back(item.label);
  return out;
}

TrainingTrace train(Codec& codec, const data::LabeledDataset& dataset, const TrainConfig& cfg, Rng& rng) {
  if (dataset.empty()) throw std::invalid_argument("cannot train on an empty dataset");
  for (const auto& item : dataset.items) check_shape(item.image, codec.shape);
  const auto stats = pooled_dataset(dataset);
  const auto labels = dataset_labels(dataset);
  return train_stats(codec, stats, labels, cfg, rng);
}

TrainingTrace train_stats(Codec& codec, std::span<const Vector> raw_stats, std::span<const int> labels,
                          const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (raw_stats.empty()) throw std::invalid_argument("cannot train on an empty dataset");
  if (raw_stats.size() != labels.size()) throw std::invalid_argument("stats/label count mismatch");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= codec.shape.n_classes) throw std::invalid_argument("label out of range");
  }
  if (!codec.codebook.initialized || !codec.extractor.normalization_fitted) initialize_from_data(codec, raw_stats, rng);

  const std::size_t n = raw_stats.size();
  const auto a_dim = static_cast<Eigen::Index>(codec.shape.feature_dim());
  Momentum vel(codec);
  semaug::ClassCovarianceBank bank(codec.shape.n_classes, codec.shape.feature_dim());
  TrainingTrace trace;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const auto bn = static_cast<Eigen::Index>(stop - start);
      std::vector<FeatureExtractor::Activations> acts;
      acts.reserve(stop - start);
      std::vector<int> batch_labels;
      std::vector<std::vector<std::uint16_t>> own;
      Matrix continuous(bn, a_dim);
      Matrix quantized(bn, a_dim);
      Matrix received(bn, a_dim);
      for (std::size_t j = start; j < stop; ++j) {
        const auto row = static_cast<Eigen::Index>(j - start);
        acts.push_back(codec.extractor.forward(raw_stats[order[j]]));
        batch_labels.push_back(labels[order[j]]);
        continuous.row(row) = acts.back().feature.transpose();
        own.push_back(quantize(acts.back().feature, codec.codebook));
        quantized.row(row) = dequantize(own.back(), codec.codebook).transpose();
      }
      if (cfg.flip_prob > 0.0) {
        SemanticMessage msg = empty_message(codec, stop - start);
        for (const auto& idx : own) msg.indices.insert(msg.indices.end(), idx.begin(), idx.end());
        received = dequantize_message(flip_symbols(msg, cfg.flip_prob, rng), codec.codebook);
      } else {
        received = quantized;
      }

      Matrix sigma = Matrix::Zero(bn, a_dim);
      if (cfg.lambda_sa > 0.0) {
        bank.update(received, batch_labels);
        sigma = semaug::blended_sigma(received, batch_labels, nullptr, bank, 0.0);
      }
      const semaug::SaResult r = semaug::sa_loss_and_gradients(received, batch_labels, codec.decoder, sigma, cfg.lambda_sa);
      if (!std::isfinite(r.loss)) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << ", batch starting at " << start << " (loss " << r.loss << ")";
        throw TrainingDiverged(os.str());
      }
      if (cfg.lr > 0.0) {
        const Matrix d_features = r.d_features + (2.0 * cfg.commitment / static_cast<double>(bn)) * (continuous - quantized);
        const ExtractorGradients eg = extractor_backward(codec.extractor, acts, d_features);
        momentum_step(codec.extractor.w1, vel.w1, eg.w1, cfg.momentum, cfg.lr);
        momentum_step(codec.extractor.b1, vel.b1, eg.b1, cfg.momentum, cfg.lr);
        momentum_step(codec.extractor.w2, vel.w2, eg.w2, cfg.momentum, cfg.lr);
        momentum_step(codec.extractor.b2, vel.b2, eg.b2, cfg.momentum, cfg.lr);
        momentum_step(codec.decoder.weight, vel.dec_w, r.d_weight, cfg.momentum, cfg.lr);
        momentum_step(codec.decoder.bias, vel.dec_b, r.d_bias, cfg.momentum, cfg.lr);
        ema_update(codec.codebook, continuous, own, cfg.ema_decay);
        if (!codec.extractor.w1.allFinite() || !codec.extractor.w2.allFinite() || !codec.decoder.weight.allFinite()) {
          std::ostringstream os;
          os << "training diverged at epoch " << epoch << ": non-finite parameters";
          throw TrainingDiverged(os.str());
        }
      }
    }
    Matrix full(static_cast<Eigen::Index>(n), a_dim);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector f = codec.extractor.forward(raw_stats[i]).feature;
      full.row(static_cast<Eigen::Index>(i)) = dequantize(quantize(f, codec.codebook), codec.codebook).transpose();
    }
    trace.loss.push_back(semaug::cross_entropy(full, labels, codec.decoder));
    const auto pred = predict_stats(codec, raw_stats);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += pred[i] == labels[i] ? 1 : 0;
    trace.accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
  }
  return trace;
}

double quantization_error(const Codec& codec, std::span<const Vector> raw_stats, const Codebook& cb) {
  if (raw_stats.empty()) return 0.0;
  const auto dim = static_cast<Eigen::Index>(cb.subvector_dim);
  double total = 0.0;
  for (const auto& s : raw_stats) {
    const Vector f = codec.extractor.forward(s).feature;
    const auto idx = quantize(f, cb);
    for (std::size_t l = 0; l < cb.n_subvectors; ++l) {
      total += (f.segment(static_cast<Eigen::Index>(l) * dim, dim) - cb.codewords[l].row(idx[l]).transpose()).norm();
    }
  }
  return total / static_cast<double>(raw_stats.size() * cb.n_subvectors);
}

double quantization_error(const Codec& codec, std::span<const Vector> raw_stats) {
  return quantization_error(codec, raw_stats, codec.codebook);
}

}  // namespace csaeo::dtjscc
