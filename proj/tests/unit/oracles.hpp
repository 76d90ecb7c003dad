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

// Reference computations used as independent oracles. None of these call into the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

inline double q_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// 2 Q(sqrt(2 snr) sin(pi/16)) for 16PSK at Es/N0 = snr_db.
inline double psk16_ser(double snr_db) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return 2.0 * q_tail(std::sqrt(2.0 * snr) * std::sin(std::numbers::pi / 16.0));
}

inline double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

/// Rician K from |H|^2 samples via the second/fourth moment relation
/// Var(|H|^2) / E[|H|^2]^2 = (1 + 2K) / (1 + K)^2.
inline double rician_k_moment(const std::vector<double>& power) {
  double m1 = 0.0;
  double m2 = 0.0;
  for (double p : power) {
    m1 += p;
    m2 += p * p;
  }
  m1 /= static_cast<double>(power.size());
  m2 /= static_cast<double>(power.size());
  const double g = (m2 - m1 * m1) / (m1 * m1);
  return (1.0 - g + std::sqrt(1.0 - g)) / g;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample KS critical value at alpha = 0.01.
inline double ks_critical_001(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return 1.628 * std::sqrt((nn + mm) / (nn * mm));
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

/// Nearest-class-mean classifier: fits class centroids on `train`, returns accuracy on `test`.
/// Rows are feature vectors.
inline double nearest_mean_accuracy(const std::vector<std::vector<double>>& train, const std::vector<int>& train_y,
                                    const std::vector<std::vector<double>>& test, const std::vector<int>& test_y,
                                    int n_classes) {
  const std::size_t dim = train.front().size();
  std::vector<std::vector<double>> mean(static_cast<std::size_t>(n_classes), std::vector<double>(dim, 0.0));
  std::vector<double> count(static_cast<std::size_t>(n_classes), 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto c = static_cast<std::size_t>(train_y[i]);
    count[c] += 1.0;
    for (std::size_t k = 0; k < dim; ++k) mean[c][k] += train[i][k];
  }
  for (std::size_t c = 0; c < mean.size(); ++c) {
    for (auto& v : mean[c]) v /= std::max(count[c], 1.0);
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_classes; ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double r = test[i][k] - mean[static_cast<std::size_t>(c)][k];
        d += r * r;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    hits += best == test_y[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace oracle
