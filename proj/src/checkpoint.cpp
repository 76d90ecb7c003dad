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

#include "csaeo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace csaeo::checkpoint {
namespace {

constexpr char kMagic[4] = {'D', 'T', 'J', 'C'};
constexpr std::uint32_t kFlagNormalization = 1u << 0;
constexpr std::uint32_t kFlagCodebook = 1u << 1;
constexpr std::uint32_t kFlagPredictor = 1u << 2;
constexpr std::uint32_t kMaxDim = 1u << 20;

using dtjscc::Matrix;
using dtjscc::Vector;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  void vec(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  // Row-major regardless of Eigen's storage order.
  void mat(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    const double v = std::bit_cast<double>(bits);
    if (!std::isfinite(v)) throw CheckpointError("checkpoint holds a non-finite parameter at byte " + std::to_string(pos_ - 8));
    return v;
  }
  Vector vec(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }
  Matrix mat(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
    }
    return m;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_) + " (need " + std::to_string(n) +
                            " more)");
    }
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_dim(std::size_t v, const char* what) {
  if (v > kMaxDim) throw CheckpointError(std::string("dimension too large to store: ") + what);
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string encode(const dtjscc::Codec& codec, const semaug::CovariancePredictor* predictor) {
  const auto& s = codec.shape;
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kFormatVersion);
  for (auto [v, name] : {std::pair{s.height, "height"}, {s.width, "width"}, {s.bands, "bands"},
                         {s.n_classes, "n_classes"}, {s.n_subvectors, "n_subvectors"},
                         {s.subvector_dim, "subvector_dim"}, {s.hidden, "hidden"}, {s.codebook_size, "codebook_size"}}) {
    w.u32(checked_dim(v, name));
  }
  std::uint32_t flags = 0;
  if (codec.extractor.normalization_fitted) flags |= kFlagNormalization;
  if (codec.codebook.initialized) flags |= kFlagCodebook;
  if (predictor != nullptr) flags |= kFlagPredictor;
  w.u32(flags);

  const auto& f = codec.extractor;
  w.vec(f.stat_mean);
  w.vec(f.stat_scale);
  w.mat(f.w1);
  w.vec(f.b1);
  w.mat(f.w2);
  w.vec(f.b2);
  for (std::size_t l = 0; l < codec.codebook.n_subvectors; ++l) {
    w.mat(codec.codebook.codewords[l]);
    w.vec(codec.codebook.ema_count[l]);
    w.mat(codec.codebook.ema_sum[l]);
  }
  w.mat(codec.decoder.weight);
  w.vec(codec.decoder.bias);
  if (predictor != nullptr) {
    w.u32(checked_dim(predictor->n_classes, "predictor n_classes"));
    w.u32(checked_dim(predictor->feature_dim, "predictor feature_dim"));
    w.mat(predictor->weight);
    w.vec(predictor->bias);
  }
  return w.take();
}

Checkpoint decode(std::string_view bytes) {
  Reader r(bytes);
  if (std::memcmp(r.bytes(4).data(), kMagic, 4) != 0) throw CheckpointError("not a codec checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kFormatVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  dtjscc::CodecShape s;
  for (std::size_t* field : {&s.height, &s.width, &s.bands, &s.n_classes, &s.n_subvectors, &s.subvector_dim,
                             &s.hidden, &s.codebook_size}) {
    *field = r.u32();
    if (*field > kMaxDim) throw CheckpointError("checkpoint dimension out of range");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("invalid checkpoint shape: ") + e.what());
  }
  const auto flags = r.u32();

  Checkpoint ck;
  auto& c = ck.codec;
  c.shape = s;
  const auto in = static_cast<Eigen::Index>(s.input_dim());
  const auto hid = static_cast<Eigen::Index>(s.hidden);
  const auto feat = static_cast<Eigen::Index>(s.feature_dim());
  const auto k = static_cast<Eigen::Index>(s.codebook_size);
  const auto dim = static_cast<Eigen::Index>(s.subvector_dim);
  c.extractor.stat_mean = r.vec(in);
  c.extractor.stat_scale = r.vec(in);
  c.extractor.w1 = r.mat(hid, in);
  c.extractor.b1 = r.vec(hid);
  c.extractor.w2 = r.mat(feat, hid);
  c.extractor.b2 = r.vec(feat);
  c.extractor.normalization_fitted = (flags & kFlagNormalization) != 0;
  c.codebook = dtjscc::Codebook::zeros(s.n_subvectors, s.subvector_dim, s.codebook_size);
  for (std::size_t l = 0; l < s.n_subvectors; ++l) {
    c.codebook.codewords[l] = r.mat(k, dim);
    c.codebook.ema_count[l] = r.vec(k);
    c.codebook.ema_sum[l] = r.mat(k, dim);
  }
  c.codebook.initialized = (flags & kFlagCodebook) != 0;
  c.decoder.weight = r.mat(static_cast<Eigen::Index>(s.n_classes), feat);
  c.decoder.bias = r.vec(static_cast<Eigen::Index>(s.n_classes));
  if ((flags & kFlagPredictor) != 0) {
    semaug::CovariancePredictor g;
    g.n_classes = r.u32();
    g.feature_dim = r.u32();
    if (g.n_classes != s.n_classes || g.feature_dim != s.feature_dim()) {
      throw CheckpointError("predictor block does not match codec dimensions");
    }
    g.weight = r.mat(static_cast<Eigen::Index>(g.n_classes) * feat, feat);
    g.bias = r.vec(static_cast<Eigen::Index>(g.n_classes) * feat);
    ck.predictor = std::move(g);
  }
  if (!r.done()) throw CheckpointError("trailing bytes after checkpoint payload at byte " + std::to_string(r.position()));
  return ck;
}

void save(const std::filesystem::path& path, const dtjscc::Codec& codec, const semaug::CovariancePredictor* predictor) {
  const std::string bytes = encode(codec, predictor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace csaeo::checkpoint
