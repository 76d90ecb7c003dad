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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csaeo::data {

/// H x W x D tensor, row-major with the band index fastest.
class MultispectralImage {
 public:
  MultispectralImage() = default;
  MultispectralImage(std::size_t height, std::size_t width, std::size_t bands);
  MultispectralImage(std::size_t height, std::size_t width, std::size_t bands, std::vector<float> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bands() const noexcept { return bands_; }
  std::size_t size() const noexcept { return values_.size(); }

  float& at(std::size_t i, std::size_t j, std::size_t k) { return values_[(i * width_ + j) * bands_ + k]; }
  float at(std::size_t i, std::size_t j, std::size_t k) const { return values_[(i * width_ + j) * bands_ + k]; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  bool same_shape(const MultispectralImage& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && bands_ == other.bands_;
  }

  friend bool operator==(const MultispectralImage&, const MultispectralImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t bands_ = 0;
  std::vector<float> values_;
};

struct LabeledImage {
  MultispectralImage image;
  int label = 0;
};

struct LabeledDataset {
  std::vector<LabeledImage> items;
  std::vector<std::string> class_names;

  std::size_t n_classes() const noexcept { return class_names.size(); }
  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }

  /// Throws if labels or shapes break the dataset invariants.
  void validate() const;
};

/// The ten land-cover class names used for the default dataset.
const std::vector<std::string>& eurosat_class_names();

/// Names for a C-class dataset: the ten land-cover names when C == 10, class_<k> otherwise.
std::vector<std::string> default_class_names(std::size_t n_classes);

struct SyntheticSpec {
  std::size_t n_classes = 10;
  std::size_t n_per_class = 100;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t bands = 3;
  /// Per-pixel Gaussian noise std.
  double noise_level = 0.1;
  /// Pairwise distance between class signatures (in per-pixel RMS units).
  double class_separation = 0.5;
  /// Per-image jitter of the class signature, same units as class_separation.
  double intra_class_std = 0.0;
  /// Fraction of items whose label is replaced by a uniformly drawn different class.
  double label_noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seeded synthetic multispectral dataset. Items are ordered by class, then index.
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

/// Per-class band-mean signatures used by the generator (n_classes x bands), for oracles.
std::vector<std::vector<double>> synthetic_band_signatures(const SyntheticSpec& spec);

/// Seed-deterministic Fisher-Yates shuffle of the items.
void shuffle(LabeledDataset& dataset, std::uint64_t seed);

/// Stratified split: the first round(fraction * n_c) items of each class (after a seeded
/// shuffle) go to the first dataset.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& dataset, double fraction,
                                                           std::uint64_t seed);

// MSIM raw tensor format, see README for the byte layout.

/// DimensionOverflow covers zero dimensions as well as element counts above kMsimMaxElements.
enum class MsimErrorKind { Io, BadMagic, Truncated, DimensionOverflow, TrailingBytes };

class MsimError : public std::runtime_error {
 public:
  MsimError(MsimErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  MsimErrorKind kind() const noexcept { return kind_; }

 private:
  MsimErrorKind kind_;
};

inline constexpr std::size_t kMsimHeaderBytes = 16;
/// Largest element count accepted by the reader.
inline constexpr std::uint64_t kMsimMaxElements = std::uint64_t{1} << 30;

std::vector<std::uint8_t> encode_raw_tensor(const MultispectralImage& image);
MultispectralImage decode_raw_tensor(std::span<const std::uint8_t> bytes);

void write_raw_tensor(const MultispectralImage& image, const std::filesystem::path& path);
MultispectralImage load_raw_tensor(const std::filesystem::path& path);

/// Reads <root>/<class_name>/<id>.msim. Classes are the sorted subdirectory names; files
/// within a class are read in sorted filename order.
LabeledDataset load_dataset_dir(const std::filesystem::path& root);

}  // namespace csaeo::data
