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

#include "csaeo/modem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csaeo::modem {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTieTolerance = 1e-12;

void fill_gray_map(Constellation& c) {
  for (std::uint8_t pos = 0; pos < kOrder; ++pos) c.gray_map[gray_encode(pos)] = pos;
}

}  // namespace

double Constellation::peak_power() const {
  double peak = 0.0;
  for (const auto& p : points) peak = std::max(peak, std::norm(p));
  return peak;
}

double Constellation::mean_energy() const {
  double sum = 0.0;
  for (const auto& p : points) sum += std::norm(p);
  return sum / static_cast<double>(kOrder);
}

double Constellation::min_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kOrder; ++i) {
    for (std::size_t j = i + 1; j < kOrder; ++j) best = std::min(best, std::abs(points[i] - points[j]));
  }
  return best;
}

Constellation build_16psk() {
  Constellation c;
  c.name = "16psk";
  for (std::size_t k = 0; k < kOrder; ++k) {
    c.points[k] = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(kOrder));
  }
  fill_gray_map(c);
  return c;
}

Constellation build_16apsk(double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) throw std::invalid_argument("16APSK ring ratio must exceed 1");
  Constellation c;
  c.name = "16apsk";
  const double r1 = std::sqrt(16.0 / (4.0 + 12.0 * gamma * gamma));
  const double r2 = gamma * r1;
  for (std::size_t k = 0; k < 4; ++k) {
    c.points[k] = std::polar(r1, kPi / 4.0 + static_cast<double>(k) * kPi / 2.0);
  }
  for (std::size_t k = 0; k < 12; ++k) {
    c.points[4 + k] = std::polar(r2, static_cast<double>(k) * kPi / 6.0);
  }
  fill_gray_map(c);
  return c;
}

Constellation build_by_name(std::string_view name, double apsk_gamma) {
  if (name == "16psk") return build_16psk();
  if (name == "16apsk") return build_16apsk(apsk_gamma);
  throw std::invalid_argument("unknown constellation '" + std::string(name) + "'");
}

ComplexBlock modulate(std::span<const Symbol> labels, const Constellation& c) {
  ComplexBlock out;
  out.reserve(labels.size());
  for (Symbol s : labels) {
    if (s >= kOrder) throw std::out_of_range("symbol label out of range: " + std::to_string(s));
    out.push_back(c.point_for(s));
  }
  return out;
}

Symbol demodulate_one(Complex y, const Constellation& c) {
  Symbol best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint8_t label = 0; label < kOrder; ++label) {
    const double d = std::norm(y - c.point_for(label));
    if (d < best_d - kTieTolerance) {
      best_d = d;
      best = label;
    }
  }
  return best;
}

std::vector<Symbol> demodulate_hard(std::span<const Complex> block, const Constellation& c) {
  std::vector<Symbol> out;
  out.reserve(block.size());
  for (const auto& y : block) out.push_back(demodulate_one(y, c));
  return out;
}

double ser_monte_carlo(const Constellation& c, double snr_db, std::size_t n_trials, Rng& rng) {
  if (n_trials == 0) throw std::invalid_argument("n_trials must be >= 1");
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double es = c.mean_energy();
  const double sigma = std::sqrt(es / (2.0 * snr));
  std::uniform_int_distribution<int> pick(0, kOrder - 1);
  std::normal_distribution<double> normal(0.0, sigma);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n_trials; ++i) {
    const auto label = static_cast<Symbol>(pick(rng));
    const double re = normal(rng);
    const double im = normal(rng);
    const Complex y = c.point_for(label) + Complex(re, im);
    if (demodulate_one(y, c) != label) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(n_trials);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double ser_16psk_analytic(double snr_db) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return std::min(1.0, 2.0 * q_function(std::sqrt(2.0 * snr) * std::sin(kPi / 16.0)));
}

}  // namespace csaeo::modem
