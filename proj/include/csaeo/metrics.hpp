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
#include <span>
#include <string>
#include <vector>

#include "csaeo/dtjscc.hpp"

namespace csaeo::metrics {

/// Row-wise argmax of a logit matrix; ties go to the lowest class index.
std::vector<int> argmax_rows(const dtjscc::Matrix& logits);

/// Fraction of predictions equal to labels. Throws on empty or mismatched input.
double top1(std::span<const int> predictions, std::span<const int> labels);
double top1(const dtjscc::Matrix& logits, std::span<const int> labels);

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> class_names);

  void add(int truth, int predicted);
  void merge(const ConfusionMatrix& other);

  std::size_t n_classes() const noexcept { return names_.size(); }
  const std::vector<std::string>& class_names() const noexcept { return names_; }
  std::uint64_t count(std::size_t truth, std::size_t predicted) const;
  std::uint64_t row_total(std::size_t truth) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;

  /// Percent of row `truth` predicted as `predicted`, 0 for empty rows.
  double percent(std::size_t truth, std::size_t predicted) const;
  /// Diagonal percentage, i.e. per-class accuracy.
  double class_accuracy(std::size_t c) const { return percent(c, c); }
  double accuracy() const;
  /// Row percentages rounded to hundredths by largest remainder, so nonempty rows sum to
  /// exactly 100.00 in the printed view.
  std::vector<double> rounded_row(std::size_t truth) const;

  /// Header row of class names, then one row of two-decimal percentages per true class.
  void write_csv(std::ostream& os) const;
  std::string to_csv() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels,
                          std::vector<std::string> class_names);
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t n_classes);

double index_error_rate(std::span<const std::uint16_t> sent, std::span<const std::uint16_t> received);
double index_error_rate(const dtjscc::SemanticMessage& sent, const dtjscc::SemanticMessage& received);

/// Fixed two-decimal rendering used by every percentage table.
std::string format_percent(double value);

}  // namespace csaeo::metrics
