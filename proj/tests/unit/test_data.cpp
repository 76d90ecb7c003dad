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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <unistd.h>

#include "csaeo/data.hpp"
#include "csaeo/rng.hpp"
#include "oracles.hpp"

using namespace csaeo;
using namespace csaeo::data;
namespace fs = std::filesystem;

namespace {

std::vector<double> band_means(const MultispectralImage& img) {
  std::vector<double> m(img.bands(), 0.0);
  for (std::size_t i = 0; i < img.height(); ++i) {
    for (std::size_t j = 0; j < img.width(); ++j) {
      for (std::size_t k = 0; k < img.bands(); ++k) m[k] += img.at(i, j, k);
    }
  }
  for (auto& v : m) v /= static_cast<double>(img.height() * img.width());
  return m;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("csaeo_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

TEST_CASE("noiseless classes are constant") {
  SyntheticSpec spec;
  spec.n_per_class = 4;
  spec.height = 8;
  spec.width = 8;
  spec.noise_level = 0.0;
  const auto ds = generate_synthetic(spec);
  REQUIRE(ds.size() == 40);
  for (const auto& item : ds.items) {
    const auto& first = *std::find_if(ds.items.begin(), ds.items.end(), [&](const auto& o) { return o.label == item.label; });
    CHECK(item.image == first.image);
  }
  CHECK(ds.class_names == eurosat_class_names());
  CHECK(ds.class_names.front() == "AnnualCrop");
  CHECK(ds.class_names.back() == "SeaLake");
}

TEST_CASE("generation is seed-deterministic") {
  SyntheticSpec spec;
  spec.n_per_class = 3;
  spec.height = 12;
  spec.width = 10;
  spec.seed = 77;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.items[i].image == b.items[i].image);
    CHECK(a.items[i].label == b.items[i].label);
  }
  spec.seed = 78;
  CHECK(!(generate_synthetic(spec).items[0].image == a.items[0].image));
}

TEST_CASE("default dataset is separable by band means") {
  SyntheticSpec spec;
  spec.seed = 5;
  const auto ds = generate_synthetic(spec);
  auto [train, test] = stratified_split(ds, 0.5, 9);
  std::vector<std::vector<double>> xtr, xte;
  std::vector<int> ytr, yte;
  for (const auto& it : train.items) {
    xtr.push_back(band_means(it.image));
    ytr.push_back(it.label);
  }
  for (const auto& it : test.items) {
    xte.push_back(band_means(it.image));
    yte.push_back(it.label);
  }
  CHECK(oracle::nearest_mean_accuracy(xtr, ytr, xte, yte, 10) >= 0.99);
}

TEST_CASE("signature-based accuracy does not improve with noise") {
  SyntheticSpec spec;
  spec.height = 8;
  spec.width = 8;
  spec.n_per_class = 60;
  spec.seed = 3;
  const auto sig = synthetic_band_signatures(spec);
  REQUIRE(sig.size() == spec.n_classes);
  std::vector<std::vector<double>> centers(sig.begin(), sig.end());
  std::vector<int> center_y;
  for (std::size_t c = 0; c < sig.size(); ++c) center_y.push_back(static_cast<int>(c));
  double prev = 1.0;
  for (double noise : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    spec.noise_level = noise;
    const auto ds = generate_synthetic(spec);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (const auto& it : ds.items) {
      x.push_back(band_means(it.image));
      y.push_back(it.label);
    }
    const double acc = oracle::nearest_mean_accuracy(centers, center_y, x, y, 10);
    if (noise == 0.0) CHECK(acc == 1.0);
    CHECK(acc <= prev + 0.02);
    prev = acc;
  }
}

TEST_CASE("spec validation") {
  SyntheticSpec spec;
  spec.n_classes = 1;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
  spec = SyntheticSpec{};
  spec.n_per_class = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
  spec = SyntheticSpec{};
  spec.noise_level = -0.1;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
  CHECK_THROWS_AS(MultispectralImage(0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(MultispectralImage(1, 1, 1, std::vector<float>{NAN}), std::invalid_argument);
}

TEST_CASE("label noise and shuffling") {
  SyntheticSpec spec;
  spec.height = 4;
  spec.width = 4;
  spec.n_per_class = 200;
  spec.label_noise = 0.2;
  const auto noisy = generate_synthetic(spec);
  spec.label_noise = 0.0;
  const auto clean = generate_synthetic(spec);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) changed += noisy.items[i].label != clean.items[i].label ? 1 : 0;
  CHECK(std::abs(static_cast<double>(changed) / clean.size() - 0.2) < 0.03);

  auto a = clean;
  auto b = clean;
  shuffle(a, 4);
  shuffle(b, 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.items[i].image == b.items[i].image);
}

TEST_CASE("stratified split keeps class proportions") {
  SyntheticSpec spec;
  spec.height = 4;
  spec.width = 4;
  spec.n_per_class = 10;
  const auto ds = generate_synthetic(spec);
  auto [train, test] = stratified_split(ds, 0.7, 1);
  CHECK(train.size() == 70);
  CHECK(test.size() == 30);
  std::map<int, int> per;
  for (const auto& it : train.items) ++per[it.label];
  for (const auto& [c, n] : per) CHECK(n == 7);
}

TEST_CASE("MSIM round trip and byte layout") {
  TempDir dir("msim");
  MultispectralImage img(3, 2, 4);
  float v = -1.5f;
  for (auto& x : img.values()) x = (v += 0.37f);
  write_raw_tensor(img, dir.path / "a.msim");
  CHECK(load_raw_tensor(dir.path / "a.msim") == img);
  CHECK(read_bytes(dir.path / "a.msim") == encode_raw_tensor(img));

  const MultispectralImage one(1, 1, 1, std::vector<float>{0.0f});
  write_raw_tensor(one, dir.path / "one.msim");
  const auto bytes = read_bytes(dir.path / "one.msim");
  CHECK(bytes.size() == 4 + 12 + 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MSIM");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 1);
}

TEST_CASE("MSIM errors are distinct") {
  auto kind_of = [](const std::vector<std::uint8_t>& b) {
    try {
      (void)decode_raw_tensor(b);
    } catch (const MsimError& e) {
      return e.kind();
    }
    FAIL("expected an MSIM error");
    return MsimErrorKind::Io;
  };
  std::vector<std::uint8_t> bad{'X', 'X', 'X', 'X'};
  put_u32(bad, 1);
  put_u32(bad, 1);
  put_u32(bad, 1);
  for (int i = 0; i < 4; ++i) bad.push_back(0);
  CHECK(kind_of(bad) == MsimErrorKind::BadMagic);

  std::vector<std::uint8_t> shortp{'M', 'S', 'I', 'M'};
  put_u32(shortp, 2);
  put_u32(shortp, 2);
  put_u32(shortp, 1);
  for (int i = 0; i < 12; ++i) shortp.push_back(0);
  CHECK(kind_of(shortp) == MsimErrorKind::Truncated);

  std::vector<std::uint8_t> huge{'M', 'S', 'I', 'M'};
  put_u32(huge, 0xFFFFFFFFu);
  put_u32(huge, 0xFFFFFFFFu);
  put_u32(huge, 16);
  CHECK(kind_of(huge) == MsimErrorKind::DimensionOverflow);

  std::vector<std::uint8_t> trailing{'M', 'S', 'I', 'M'};
  put_u32(trailing, 1);
  put_u32(trailing, 1);
  put_u32(trailing, 1);
  for (int i = 0; i < 8; ++i) trailing.push_back(0);
  CHECK(kind_of(trailing) == MsimErrorKind::TrailingBytes);

  std::vector<std::uint8_t> header_only{'M', 'S', 'I', 'M', 1, 0};
  CHECK(kind_of(header_only) == MsimErrorKind::Truncated);

  CHECK_THROWS_AS(load_raw_tensor("/nonexistent/file.msim"), MsimError);
}

TEST_CASE("dataset directory ingestion") {
  TempDir dir("ds");
  for (const char* cls : {"b_water", "a_field"}) {
    fs::create_directories(dir.path / cls);
    for (int i = 0; i < 3; ++i) {
      MultispectralImage img(2, 2, 3);
      for (auto& x : img.values()) x = static_cast<float>(i) + (cls[0] == 'a' ? 0.0f : 10.0f);
      write_raw_tensor(img, dir.path / cls / (std::to_string(i) + ".msim"));
    }
  }
  const auto ds = load_dataset_dir(dir.path);
  REQUIRE(ds.size() == 6);
  CHECK(ds.class_names == std::vector<std::string>{"a_field", "b_water"});
  CHECK(ds.items[0].label == 0);
  CHECK(ds.items[5].label == 1);
  CHECK(ds.items[4].image.at(0, 0, 0) == 11.0f);
}
