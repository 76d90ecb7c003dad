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

#include "csaeo/linkbudget.hpp"

#include <cmath>
#include <stdexcept>

namespace csaeo::linkbudget {

void LinkBudgetParams::validate() const {
  if (!(carrier_ghz > 0.0)) throw std::invalid_argument("carrier_ghz must be positive");
  if (!(gas_loss_db >= 0.0)) throw std::invalid_argument("gas_loss_db must be >= 0");
  if (!(scint_loss_db >= 0.0)) throw std::invalid_argument("scint_loss_db must be >= 0");
  if (!(shadow_sigma_db >= 0.0)) throw std::invalid_argument("shadow_sigma_db must be >= 0");
}

double fspl_db(double distance_m, double carrier_ghz) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be positive");
  if (!(carrier_ghz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  return 32.45 + 20.0 * std::log10(carrier_ghz) + 20.0 * std::log10(distance_m);
}

double sample_shadow_fading_db(double sigma_db, Rng& rng) {
  if (!(sigma_db >= 0.0)) throw std::invalid_argument("shadow sigma must be >= 0");
  if (sigma_db == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, sigma_db);
  return normal(rng);
}

PathLossBreakdown ground_path_loss_with_shadow(double distance_m, const LinkBudgetParams& params, double shadow_db) {
  params.validate();
  PathLossBreakdown out;
  out.fspl_db = fspl_db(distance_m, params.carrier_ghz);
  out.shadow_db = shadow_db;
  out.gas_db = params.gas_loss_db;
  out.scint_db = params.scint_loss_db;
  out.total_db = out.fspl_db + out.shadow_db + out.gas_db + out.scint_db;
  return out;
}

PathLossBreakdown ground_path_loss(double distance_m, const LinkBudgetParams& params, Rng& rng) {
  params.validate();
  const double shadow = sample_shadow_fading_db(params.shadow_sigma_db, rng);
  return ground_path_loss_with_shadow(distance_m, params, shadow);
}

PathLossBreakdown isl_path_loss(double distance_m, const LinkBudgetParams& params) {
  params.validate();
  PathLossBreakdown out;
  out.fspl_db = fspl_db(distance_m, params.carrier_ghz);
  out.total_db = out.fspl_db;
  return out;
}

double zeta_linear(double zeta_db) {
  if (!std::isfinite(zeta_db)) throw std::invalid_argument("zeta must be finite");
  return std::pow(10.0, -zeta_db / 10.0);
}

}  // namespace csaeo::linkbudget
