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

#include "csaeo/rng.hpp"

namespace csaeo::linkbudget {

/// Defaults are the 28 GHz LEO simulation parameters.
struct LinkBudgetParams {
  double carrier_ghz = 28.0;
  double tx_gain_dbi = 35.0;
  double rx_gain_dbi = 37.0;
  double gas_loss_db = 0.3;
  double scint_loss_db = 0.5;
  double shadow_sigma_db = 0.0;

  void validate() const;
};

struct PathLossBreakdown {
  double fspl_db = 0.0;
  double shadow_db = 0.0;
  double gas_db = 0.0;
  double scint_db = 0.0;
  double total_db = 0.0;
};

/// 32.45 + 20 log10(f_GHz) + 20 log10(d_m). Throws on nonpositive inputs.
double fspl_db(double distance_m, double carrier_ghz);

/// Zero-mean Gaussian in dB. Returns exactly 0 without touching the stream when sigma is 0.
double sample_shadow_fading_db(double sigma_db, Rng& rng);

PathLossBreakdown ground_path_loss(double distance_m, const LinkBudgetParams& params, Rng& rng);

/// Same as above with the shadow term pinned to a known value (0 for the nominal budget).
PathLossBreakdown ground_path_loss_with_shadow(double distance_m, const LinkBudgetParams& params, double shadow_db);

/// Free-space only; the shadow, gas and scintillation fields are zero.
PathLossBreakdown isl_path_loss(double distance_m, const LinkBudgetParams& params);

/// zeta in dB, kept as a loss: total path loss minus transmit antenna gain.
constexpr double large_scale_gain_db(double total_loss_db, double tx_gain_dbi) noexcept {
  return total_loss_db - tx_gain_dbi;
}

/// Linear power gain for a zeta stored as a loss in dB.
double zeta_linear(double zeta_db);

}  // namespace csaeo::linkbudget
