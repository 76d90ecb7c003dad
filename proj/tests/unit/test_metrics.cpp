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

#include <numeric>
#include <sstream>

#include "csaeo/metrics.hpp"
#include "csaeo/rng.hpp"

using namespace csaeo;
using namespace csaeo::metrics;

TEST_CASE("top-1 by hand") {
  const std::vector<int> y{0, 1, 2, 3};
  CHECK(top1(y, y) == 1.0);
  const std::vector<int> wrong{1, 2, 3, 0};
  CHECK(top1(wrong, y) == 0.0);
  const std::vector<int> three{0, 1, 2, 0};
  CHECK(top1(three, y) == 0.75);
  const std::vector<int> empty;
  CHECK_THROWS_AS(top1(empty, empty), std::invalid_argument);
  CHECK_THROWS_AS(top1(three, std::vector<int>{0}), std::invalid_argument);

  dtjscc::Matrix logits(2, 3);
  logits << 0.0, 2.0, 2.0, 5.0, 1.0, 0.0;
  CHECK(argmax_rows(logits) == std::vector<int>{1, 0});
  CHECK(top1(logits, std::vector<int>{1, 0}) == 1.0);
}

TEST_CASE("confusion of perfect predictions is diagonal") {
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) y.push_back(i % 5);
  const auto cm = confusion(y, y, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(cm.percent(i, i) == 100.0);
    CHECK(cm.class_accuracy(i) == 100.0);
  }
  CHECK(cm.accuracy() == 1.0);
  CHECK(cm.class_names()[4] == "class_4");
}

TEST_CASE("uniform random predictions spread evenly") {
  Rng rng(1);
  std::uniform_int_distribution<int> pick(0, 9);
  std::vector<int> p, y;
  for (int i = 0; i < 200000; ++i) {
    y.push_back(i % 10);
    p.push_back(pick(rng));
  }
  const auto cm = confusion(p, y, 10);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(cm.percent(i, j) - 10.0) < 1.0);
    const auto row = cm.rounded_row(i);
    CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 100.0) < 0.01);
  }
  CHECK(top1(p, y) == static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
}

TEST_CASE("rounded rows sum to 100 exactly in hundredths") {
  std::vector<int> p{0, 1, 2}, y{0, 0, 0};
  const auto cm = confusion(p, y, 3);
  const auto row = cm.rounded_row(0);
  long hundredths = 0;
  for (double v : row) hundredths += std::lround(v * 100.0);
  CHECK(hundredths == 10000);
}

TEST_CASE("relabeling permutes the confusion matrix") {
  Rng rng(3);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<int> p, y;
  for (int i = 0; i < 400; ++i) {
    p.push_back(pick(rng));
    y.push_back(pick(rng));
  }
  const std::array<int, 4> perm{2, 0, 3, 1};
  std::vector<int> pp, yy;
  for (int v : p) pp.push_back(perm[v]);
  for (int v : y) yy.push_back(perm[v]);
  const auto a = confusion(p, y, 4);
  const auto b = confusion(pp, yy, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(a.count(i, j) == b.count(perm[i], perm[j]));
}

TEST_CASE("confusion csv layout") {
  ConfusionMatrix cm({"A", "B"});
  cm.add(0, 0);
  cm.add(0, 1);
  cm.add(1, 1);
  CHECK(cm.to_csv() == "true\\predicted,A,B\nA,50.00,50.00\nB,0.00,100.00\n");
  CHECK_THROWS_AS(cm.add(2, 0), std::out_of_range);
  ConfusionMatrix other({"A", "B"});
  other.add(1, 0);
  cm.merge(other);
  CHECK(cm.total() == 4);
  CHECK(format_percent(99.2149) == "99.21");
}

TEST_CASE("index error rate") {
  const std::vector<std::uint16_t> a{1, 2, 3, 4}, b{1, 2, 0, 0}, c{0, 0, 0, 0};
  CHECK(index_error_rate(a, a) == 0.0);
  CHECK(index_error_rate(a, c) == 1.0);
  CHECK(index_error_rate(a, b) == 0.5);
  CHECK_THROWS_AS(index_error_rate(a, std::vector<std::uint16_t>{1}), std::invalid_argument);
}
