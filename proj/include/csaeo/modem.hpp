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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csaeo/channel.hpp"
#include "csaeo/rng.hpp"

namespace csaeo::modem {

using channel::Complex;
using channel::ComplexBlock;

/// One 16-ary modulation symbol value (0..15).
using Symbol = std::uint8_t;

inline constexpr std::size_t kOrder = 16;

/// A unit-average-energy 16-point constellation. gray_map[label] is the position in
/// points that carries that label.
struct Constellation {
  std::string name;
  std::array<Complex, kOrder> points{};
  std::array<std::uint8_t, kOrder> gray_map{};
  int bits_per_symbol = 4;

  const Complex& point_for(Symbol label) const { return points[gray_map[label]]; }
  double peak_power() const;
  double mean_energy() const;
  double min_distance() const;
};

constexpr std::uint8_t gray_encode(std::uint8_t v) noexcept { return static_cast<std::uint8_t>(v ^ (v >> 1)); }

Constellation build_16psk();

inline constexpr double kDefaultApskGamma = 2.85;

/// 4+12 ring APSK; gamma is the outer/inner radius ratio and must exceed 1.
Constellation build_16apsk(double gamma = kDefaultApskGamma);

/// "16psk" or "16apsk".
Constellation build_by_name(std::string_view name, double apsk_gamma = kDefaultApskGamma);

ComplexBlock modulate(std::span<const Symbol> labels, const Constellation& c);

/// Nearest point per sample; ties (within 1e-12 in squared distance) go to the lowest label.
std::vector<Symbol> demodulate_hard(std::span<const Complex> block, const Constellation& c);

Symbol demodulate_one(Complex y, const Constellation& c);

/// Symbol error rate over AWGN at the given Es/N0 (dB), with uniformly random labels.
double ser_monte_carlo(const Constellation& c, double snr_db, std::size_t n_trials, Rng& rng);

/// 2 Q(sqrt(2 Es/N0) sin(pi/16)); the standard high-SNR approximation for 16PSK.
double ser_16psk_analytic(double snr_db);

/// Gaussian tail probability.
double q_function(double x);

}  // namespace csaeo::modem
