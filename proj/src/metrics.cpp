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

#include "csaeo/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace csaeo::metrics {

std::vector<int> argmax_rows(const dtjscc::Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double top1(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw std::invalid_argument("top1 of an empty prediction set");
  if (predictions.size() != labels.size()) throw std::invalid_argument("top1: prediction/label length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double top1(const dtjscc::Matrix& logits, std::span<const int> labels) {
  const auto pred = argmax_rows(logits);
  return top1(pred, labels);
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {
  if (names_.empty()) throw std::invalid_argument("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(int truth, int predicted) {
  const auto c = static_cast<int>(n_classes());
  if (truth < 0 || truth >= c || predicted < 0 || predicted >= c) {
    throw std::out_of_range("class index outside [0, " + std::to_string(c) + ")");
  }
  ++counts_[static_cast<std::size_t>(truth) * n_classes() + static_cast<std::size_t>(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_classes() != n_classes()) throw std::invalid_argument("cannot merge confusion matrices of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::count(std::size_t truth, std::size_t predicted) const {
  if (truth >= n_classes() || predicted >= n_classes()) throw std::out_of_range("confusion index out of range");
  return counts_[truth * n_classes() + predicted];
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_classes(); ++j) s += count(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < n_classes(); ++c) s += count(c, c);
  return s;
}

double ConfusionMatrix::percent(std::size_t truth, std::size_t predicted) const {
  const auto row = row_total(truth);
  if (row == 0) return 0.0;
  return 100.0 * static_cast<double>(count(truth, predicted)) / static_cast<double>(row);
}

double ConfusionMatrix::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

std::vector<double> ConfusionMatrix::rounded_row(std::size_t truth) const {
  const std::size_t c = n_classes();
  std::vector<double> out(c, 0.0);
  const auto row = row_total(truth);
  if (row == 0) return out;
  std::vector<std::uint64_t> hundredths(c);
  std::vector<std::uint64_t> remainder(c);
  std::uint64_t assigned = 0;
  for (std::size_t j = 0; j < c; ++j) {
    const std::uint64_t scaled = count(truth, j) * 10000;
    hundredths[j] = scaled / row;
    remainder[j] = scaled % row;
    assigned += hundredths[j];
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < 10000; ++k, ++assigned) ++hundredths[order[k]];
  for (std::size_t j = 0; j < c; ++j) out[j] = static_cast<double>(hundredths[j]) / 100.0;
  return out;
}

void ConfusionMatrix::write_csv(std::ostream& os) const {
  os << "true\\predicted";
  for (const auto& n : names_) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < n_classes(); ++i) {
    os << names_[i];
    for (double v : rounded_row(i)) os << ',' << format_percent(v);
    os << '\n';
  }
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels,
                          std::vector<std::string> class_names) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("confusion: prediction/label length mismatch");
  ConfusionMatrix cm(std::move(class_names));
  for (std::size_t i = 0; i < labels.size(); ++i) cm.add(labels[i], predictions[i]);
  return cm;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t n_classes) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_classes; ++c) names.push_back("class_" + std::to_string(c));
  return confusion(predictions, labels, std::move(names));
}

double index_error_rate(std::span<const std::uint16_t> sent, std::span<const std::uint16_t> received) {
  if (sent.size() != received.size()) throw std::invalid_argument("index_error_rate: length mismatch");
  if (sent.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) errors += sent[i] != received[i] ? 1 : 0;
  return static_cast<double>(errors) / static_cast<double>(sent.size());
}

double index_error_rate(const dtjscc::SemanticMessage& sent, const dtjscc::SemanticMessage& received) {
  return index_error_rate(sent.indices, received.indices);
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

}  // namespace csaeo::metrics
