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

#include "csaeo/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csaeo::channel {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace

FadingKind parse_fading_kind(std::string_view text) {
  if (text == "awgn") return FadingKind::Awgn;
  if (text == "rician") return FadingKind::Rician;
  if (text == "rayleigh") return FadingKind::Rayleigh;
  if (text == "leo_rician") return FadingKind::LeoRician;
  if (text == "leo_rayleigh") return FadingKind::LeoRayleigh;
  throw std::invalid_argument("unknown channel kind '" + std::string(text) + "'");
}

std::string_view to_string(FadingKind kind) {
  switch (kind) {
    case FadingKind::Awgn: return "awgn";
    case FadingKind::Rician: return "rician";
    case FadingKind::Rayleigh: return "rayleigh";
    case FadingKind::LeoRician: return "leo_rician";
    case FadingKind::LeoRayleigh: return "leo_rayleigh";
  }
  return "?";
}

Equalization parse_equalization(std::string_view text) {
  if (text == "perfect") return Equalization::Perfect;
  if (text == "none") return Equalization::None;
  throw std::invalid_argument("equalize must be 'perfect' or 'none', got '" + std::string(text) + "'");
}

void ChannelKind::validate() const {
  if (!(k_factor >= 0.0)) throw std::invalid_argument("Rician K-factor must be >= 0");
  if (los_only && kind != FadingKind::Awgn && effective_k() == 0.0) {
    throw std::invalid_argument("LoS-only channel needs a positive K-factor");
  }
  if (is_leo() && !std::isfinite(zeta_db)) throw std::invalid_argument("LEO channel needs a finite zeta");
  if (!std::isfinite(doppler_hz) || !std::isfinite(delay_s) || !std::isfinite(los_phase_rad)) {
    throw std::invalid_argument("channel parameters must be finite");
  }
}

Complex sample_fading(const ChannelKind& kind, double zeta_lin, Rng& rng) {
  kind.validate();
  if (!(zeta_lin > 0.0)) throw std::invalid_argument("zeta must be a positive linear gain");
  if (kind.kind == FadingKind::Awgn) return {1.0, 0.0};

  const double k = kind.effective_k();
  const Complex los = std::polar(1.0, kind.los_phase_rad);
  const double los_amp = std::sqrt(k * zeta_lin / (k + 1.0));
  if (kind.los_only) return los_amp * los;

  // CN(0, 1): each component has variance 1/2.
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double re = normal(rng);
  const double im = normal(rng);
  const double nlos_amp = std::sqrt(zeta_lin / (k + 1.0));
  return los_amp * los + nlos_amp * Complex(re, im);
}

ComplexBlock apply_channel(std::span<const Complex> block, const ChannelInstance& inst, Rng& rng) {
  if (!(inst.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  ComplexBlock out(block.begin(), block.end());
  if (inst.noise_sigma == 0.0) {
    for (auto& y : out) y *= inst.gain;
    return out;
  }
  std::normal_distribution<double> normal(0.0, inst.noise_sigma);
  for (auto& y : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    y = inst.gain * y + Complex(re, im);
  }
  return out;
}

ComplexBlock apply_channel(std::span<const Complex> block, std::span<const Complex> gains, double noise_sigma,
                           Rng& rng) {
  if (gains.size() != block.size()) throw std::invalid_argument("gain count must match block length");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  ComplexBlock out(block.size());
  if (noise_sigma == 0.0) {
    for (std::size_t i = 0; i < block.size(); ++i) out[i] = gains[i] * block[i];
    return out;
  }
  std::normal_distribution<double> normal(0.0, noise_sigma);
  for (std::size_t i = 0; i < block.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    out[i] = gains[i] * block[i] + Complex(re, im);
  }
  return out;
}

Complex response_at(double t_s, double f_hz, Complex fading, double doppler_hz, double delay_s) {
  const double cycles = t_s * doppler_hz - f_hz * delay_s;
  // Reduce before scaling so long time spans keep full phase precision.
  const double frac = cycles - std::floor(cycles);
  return fading * std::polar(1.0, kTwoPi * frac);
}

std::vector<Complex> response_block(std::size_t n, double symbol_period_s, double f_hz, Complex fading,
                                    double doppler_hz, double delay_s) {
  std::vector<Complex> gains(n);
  for (std::size_t i = 0; i < n; ++i) {
    gains[i] = response_at(static_cast<double>(i) * symbol_period_s, f_hz, fading, doppler_hz, delay_s);
  }
  return gains;
}

double noise_sigma_from_psnr(double psnr_db, double peak_symbol_power) {
  if (!(peak_symbol_power > 0.0)) throw std::invalid_argument("peak symbol power must be positive");
  if (!std::isfinite(psnr_db)) throw std::invalid_argument("PSNR must be finite");
  const double total = peak_symbol_power / std::pow(10.0, psnr_db / 10.0);
  return std::sqrt(total / 2.0);
}

ComplexBlock equalize(std::span<const Complex> received, std::span<const Complex> gains) {
  if (gains.size() != received.size()) throw std::invalid_argument("gain count must match block length");
  ComplexBlock out(received.size());
  for (std::size_t i = 0; i < received.size(); ++i) {
    out[i] = gains[i] == Complex(0.0, 0.0) ? received[i] : received[i] / gains[i];
  }
  return out;
}

}  // namespace csaeo::channel
