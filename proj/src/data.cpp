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

#include "csaeo/data.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "csaeo/rng.hpp"

namespace csaeo::data {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kBaseLevel = 0.5;
constexpr int kRotationCandidates = 16;

// Spatial frequencies (rows, cols) of the zero-mean texture patterns.
constexpr std::array<std::array<int, 2>, 3> kTextureFreqs{{{1, 0}, {0, 1}, {1, 1}}};
constexpr std::size_t kTexturesPerBand = kTextureFreqs.size();

std::size_t appearance_dim(std::size_t bands) { return bands * (1 + kTexturesPerBand); }

// Orthonormal basis of the complement of the all-ones vector in R^C, as C x (C-1) columns.
Eigen::MatrixXd simplex_basis(std::size_t c) {
  Eigen::MatrixXd centered = Eigen::MatrixXd::Identity(c, c) - Eigen::MatrixXd::Constant(c, c, 1.0 / c);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(centered);
  Eigen::MatrixXd q = qr.householderQ();
  // The first C-1 columns of Q span the column space of the rank C-1 centered matrix.
  return q.leftCols(c - 1);
}

Eigen::MatrixXd random_isometry(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t tall = std::max(rows, cols);
  const std::size_t narrow = std::min(rows, cols);
  Eigen::MatrixXd g(tall, narrow);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(narrow);
  if (rows >= cols) return q;
  return q.transpose();
}

// Rows are class appearance vectors (n_classes x appearance_dim), equidistant when the
// appearance space is large enough.
Eigen::MatrixXd class_appearance(const SyntheticSpec& spec) {
  const std::size_t c = spec.n_classes;
  const std::size_t m = appearance_dim(spec.bands);
  Eigen::MatrixXd basis = simplex_basis(c);
  // Vertex k is e_k - 1/C; its coordinates in the basis are row k of the basis.
  Eigen::MatrixXd coords = basis;  // C x (C-1)
  const double scale = spec.class_separation / std::sqrt(2.0);

  Rng rng = make_stream(spec.seed, StreamTag::Data, {0});
  Eigen::MatrixXd best;
  double best_score = -1.0;
  for (int attempt = 0; attempt < kRotationCandidates; ++attempt) {
    Eigen::MatrixXd iso = random_isometry(m, c - 1, rng);
    Eigen::MatrixXd appearance = scale * coords * iso.transpose();  // C x M
    double score = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < c; ++a) {
      for (std::size_t b = a + 1; b < c; ++b) {
        double d2 = 0.0;
        for (std::size_t band = 0; band < spec.bands; ++band) {
          const auto col = static_cast<Eigen::Index>(band * (1 + kTexturesPerBand));
          const double diff = appearance(a, col) - appearance(b, col);
          d2 += diff * diff;
        }
        score = std::min(score, d2);
      }
    }
    if (score > best_score) {
      best_score = score;
      best = appearance;
    }
  }
  return best;
}

void render(const SyntheticSpec& spec, const Eigen::VectorXd& appearance, Rng& rng, MultispectralImage& img) {
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> patterns(kTexturesPerBand);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t t = 0; t < kTexturesPerBand; ++t) {
        const double phase = kTwoPi * (static_cast<double>(kTextureFreqs[t][0] * i) / static_cast<double>(h) +
                                       static_cast<double>(kTextureFreqs[t][1] * j) / static_cast<double>(w));
        patterns[t] = std::sqrt(2.0) * std::cos(phase);
      }
      for (std::size_t b = 0; b < spec.bands; ++b) {
        const std::size_t base = b * (1 + kTexturesPerBand);
        double v = kBaseLevel + appearance(static_cast<Eigen::Index>(base));
        for (std::size_t t = 0; t < kTexturesPerBand; ++t) {
          v += appearance(static_cast<Eigen::Index>(base + 1 + t)) * patterns[t];
        }
        if (spec.noise_level > 0.0) v += spec.noise_level * noise(rng);
        img.at(i, j, b) = static_cast<float>(v);
      }
    }
  }
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little, "MSIM writer assumes a little-endian host");
  std::array<std::uint8_t, sizeof(T)> raw{};
  std::memcpy(raw.data(), &value, sizeof(T));
  out.insert(out.end(), raw.begin(), raw.end());
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value{};
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

}  // namespace

MultispectralImage::MultispectralImage(std::size_t height, std::size_t width, std::size_t bands)
    : MultispectralImage(height, width, bands, std::vector<float>(height * width * bands, 0.0f)) {}

MultispectralImage::MultispectralImage(std::size_t height, std::size_t width, std::size_t bands,
                                       std::vector<float> values)
    : height_(height), width_(width), bands_(bands), values_(std::move(values)) {
  if (height == 0 || width == 0 || bands == 0) throw std::invalid_argument("image dimensions must be >= 1");
  if (values_.size() != height * width * bands) throw std::invalid_argument("value count does not match H*W*D");
  for (float v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("image values must be finite");
  }
}

void LabeledDataset::validate() const {
  if (class_names.empty()) throw std::invalid_argument("dataset has no classes");
  for (const auto& item : items) {
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= class_names.size()) {
      throw std::invalid_argument("label out of range: " + std::to_string(item.label));
    }
    if (!item.image.same_shape(items.front().image)) throw std::invalid_argument("dataset images differ in shape");
  }
}

const std::vector<std::string>& eurosat_class_names() {
  static const std::vector<std::string> names{"AnnualCrop", "Forest",        "HerbaceousVegetation", "Highway",
                                              "Industrial", "Pasture",       "PermanentCrop",        "Residential",
                                              "River",      "SeaLake"};
  return names;
}

std::vector<std::string> default_class_names(std::size_t n_classes) {
  if (n_classes == eurosat_class_names().size()) return eurosat_class_names();
  std::vector<std::string> names;
  for (std::size_t k = 0; k < n_classes; ++k) names.push_back("class_" + std::to_string(k));
  return names;
}

void SyntheticSpec::validate() const {
  if (n_classes < 2) throw std::invalid_argument("synthetic dataset needs at least 2 classes");
  if (n_per_class < 1) throw std::invalid_argument("n_per_class must be >= 1");
  if (height < 1 || width < 1 || bands < 1) throw std::invalid_argument("image dimensions must be >= 1");
  if (!(noise_level >= 0.0)) throw std::invalid_argument("noise_level must be >= 0");
  if (!(class_separation > 0.0)) throw std::invalid_argument("class_separation must be positive");
  if (!(intra_class_std >= 0.0)) throw std::invalid_argument("intra_class_std must be >= 0");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) throw std::invalid_argument("label_noise must lie in [0, 1]");
}

std::vector<std::vector<double>> synthetic_band_signatures(const SyntheticSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd appearance = class_appearance(spec);
  std::vector<std::vector<double>> out(spec.n_classes, std::vector<double>(spec.bands));
  for (std::size_t k = 0; k < spec.n_classes; ++k) {
    for (std::size_t b = 0; b < spec.bands; ++b) {
      out[k][b] = kBaseLevel + appearance(static_cast<Eigen::Index>(k),
                                          static_cast<Eigen::Index>(b * (1 + kTexturesPerBand)));
    }
  }
  return out;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd appearance = class_appearance(spec);
  LabeledDataset ds;
  ds.class_names = default_class_names(spec.n_classes);
  ds.items.reserve(spec.n_classes * spec.n_per_class);
  for (std::size_t k = 0; k < spec.n_classes; ++k) {
    for (std::size_t i = 0; i < spec.n_per_class; ++i) {
      Rng rng = make_stream(spec.seed, StreamTag::Data, {1, k, i});
      Eigen::VectorXd sig = appearance.row(static_cast<Eigen::Index>(k)).transpose();
      if (spec.intra_class_std > 0.0) {
        std::normal_distribution<double> jitter(0.0, spec.intra_class_std);
        for (Eigen::Index m = 0; m < sig.size(); ++m) sig(m) += jitter(rng);
      }
      MultispectralImage img(spec.height, spec.width, spec.bands);
      render(spec, sig, rng, img);
      int label = static_cast<int>(k);
      if (spec.label_noise > 0.0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) < spec.label_noise) {
          std::uniform_int_distribution<int> other(0, static_cast<int>(spec.n_classes) - 2);
          const int o = other(rng);
          label = o >= label ? o + 1 : o;
        }
      }
      ds.items.push_back({std::move(img), label});
    }
  }
  return ds;
}

void shuffle(LabeledDataset& dataset, std::uint64_t seed) {
  Rng rng = make_stream(seed, StreamTag::Shuffle, {0});
  for (std::size_t i = dataset.items.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(dataset.items[i - 1], dataset.items[pick(rng)]);
  }
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& dataset, double fraction,
                                                           std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("split fraction must lie in [0, 1]");
  std::vector<std::vector<std::size_t>> by_class(dataset.n_classes());
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    by_class.at(static_cast<std::size_t>(dataset.items[i].label)).push_back(i);
  }
  Rng rng = make_stream(seed, StreamTag::Split, {0});
  LabeledDataset first{{}, dataset.class_names};
  LabeledDataset second{{}, dataset.class_names};
  std::vector<std::size_t> first_idx, second_idx;
  for (auto& idx : by_class) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(idx[i - 1], idx[pick(rng)]);
    }
    const auto n_first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    first_idx.insert(first_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_first));
    second_idx.insert(second_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_first), idx.end());
  }
  // Interleave classes deterministically so streams are not class-sorted.
  for (std::size_t i = first_idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(first_idx[i - 1], first_idx[pick(rng)]);
  }
  for (std::size_t i = second_idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(second_idx[i - 1], second_idx[pick(rng)]);
  }
  for (std::size_t i : first_idx) first.items.push_back(dataset.items[i]);
  for (std::size_t i : second_idx) second.items.push_back(dataset.items[i]);
  return {std::move(first), std::move(second)};
}

std::vector<std::uint8_t> encode_raw_tensor(const MultispectralImage& image) {
  if (image.size() == 0) throw std::invalid_argument("cannot encode an empty image");
  std::vector<std::uint8_t> out{'M', 'S', 'I', 'M'};
  out.reserve(kMsimHeaderBytes + 4 * image.size());
  put_le(out, static_cast<std::uint32_t>(image.height()));
  put_le(out, static_cast<std::uint32_t>(image.width()));
  put_le(out, static_cast<std::uint32_t>(image.bands()));
  for (float v : image.values()) put_le(out, v);
  return out;
}

MultispectralImage decode_raw_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "MSIM", 4) != 0) {
    throw MsimError(MsimErrorKind::BadMagic, "missing MSIM magic");
  }
  if (bytes.size() < kMsimHeaderBytes) throw MsimError(MsimErrorKind::Truncated, "truncated MSIM header");
  const auto h = get_le<std::uint32_t>(bytes, 4);
  const auto w = get_le<std::uint32_t>(bytes, 8);
  const auto d = get_le<std::uint32_t>(bytes, 12);
  if (h == 0 || w == 0 || d == 0) throw MsimError(MsimErrorKind::DimensionOverflow, "MSIM dimension is zero");
  const std::uint64_t count = std::uint64_t{h} * w;
  if (count > kMsimMaxElements || count * d > kMsimMaxElements) {
    throw MsimError(MsimErrorKind::DimensionOverflow, "MSIM dimensions exceed the element limit");
  }
  const std::uint64_t n = count * d;
  const std::uint64_t expected = kMsimHeaderBytes + 4 * n;
  if (bytes.size() < expected) {
    throw MsimError(MsimErrorKind::Truncated, "MSIM payload truncated: expected " + std::to_string(expected) +
                                                  " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) throw MsimError(MsimErrorKind::TrailingBytes, "MSIM file has trailing bytes");
  std::vector<float> values(n);
  for (std::uint64_t i = 0; i < n; ++i) values[i] = get_le<float>(bytes, kMsimHeaderBytes + 4 * i);
  return MultispectralImage(h, w, d, std::move(values));
}

void write_raw_tensor(const MultispectralImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_raw_tensor(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MsimError(MsimErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw MsimError(MsimErrorKind::Io, "write failed for '" + path.string() + "'");
}

MultispectralImage load_raw_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MsimError(MsimErrorKind::Io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_raw_tensor(bytes);
}

LabeledDataset load_dataset_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw MsimError(MsimErrorKind::Io, "not a directory: '" + root.string() + "'");
  LabeledDataset ds;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) ds.class_names.push_back(entry.path().filename().string());
  }
  std::sort(ds.class_names.begin(), ds.class_names.end());
  for (std::size_t k = 0; k < ds.class_names.size(); ++k) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / ds.class_names[k])) {
      if (entry.is_regular_file() && entry.path().extension() == ".msim") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) ds.items.push_back({load_raw_tensor(f), static_cast<int>(k)});
  }
  ds.validate();
  return ds;
}

}  // namespace csaeo::data
