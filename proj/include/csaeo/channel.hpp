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

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "csaeo/rng.hpp"

namespace csaeo::channel {

using Complex = std::complex<double>;
using ComplexBlock = std::vector<Complex>;

enum class FadingKind { Awgn, Rician, Rayleigh, LeoRician, LeoRayleigh };

FadingKind parse_fading_kind(std::string_view text);
std::string_view to_string(FadingKind kind);

/// A small-scale fading law plus the LEO-only extras. Rayleigh kinds ignore k_factor.
struct ChannelKind {
  FadingKind kind = FadingKind::Awgn;
  double k_factor = 2.8;
  /// Drop the scattered component (inter-satellite links have no NLoS path).
  bool los_only = false;
  /// Phase of the deterministic LoS phasor.
  double los_phase_rad = 0.0;
  double zeta_db = 0.0;
  double doppler_hz = 0.0;
  double delay_s = 0.0;

  bool is_leo() const noexcept { return kind == FadingKind::LeoRician || kind == FadingKind::LeoRayleigh; }
  bool is_rayleigh() const noexcept { return kind == FadingKind::Rayleigh || kind == FadingKind::LeoRayleigh; }
  /// Rician K used by the sampler: 0 for Rayleigh kinds.
  double effective_k() const noexcept { return is_rayleigh() ? 0.0 : k_factor; }

  void validate() const;
};

struct ChannelInstance {
  Complex gain{1.0, 0.0};
  /// Standard deviation of each real/imaginary noise component.
  double noise_sigma = 0.0;
};

enum class Equalization { Perfect, None };

Equalization parse_equalization(std::string_view text);

/// Draws one complex gain. zeta_lin is a linear power gain (1 for normalized studies).
Complex sample_fading(const ChannelKind& kind, double zeta_lin, Rng& rng);

/// y = H x + n, with independent circular Gaussian noise per sample.
ComplexBlock apply_channel(std::span<const Complex> block, const ChannelInstance& inst, Rng& rng);

/// Per-sample gains (used for the Doppler-rotated LEO responses). gains.size() must equal block.size().
ComplexBlock apply_channel(std::span<const Complex> block, std::span<const Complex> gains, double noise_sigma,
                           Rng& rng);

/// fading * exp(j 2 pi (t v - f tau)).
Complex response_at(double t_s, double f_hz, Complex fading, double doppler_hz, double delay_s);

/// Per-sample gains of a block-fading LEO link sampled every symbol_period_s.
std::vector<Complex> response_block(std::size_t n, double symbol_period_s, double f_hz, Complex fading,
                                    double doppler_hz, double delay_s);

/// Per-component noise sigma so that peak_symbol_power / (2 sigma^2) equals the PSNR.
double noise_sigma_from_psnr(double psnr_db, double peak_symbol_power);

/// Divides each sample by its gain; samples with a zero gain are left as-is.
ComplexBlock equalize(std::span<const Complex> received, std::span<const Complex> gains);

}  // namespace csaeo::channel
