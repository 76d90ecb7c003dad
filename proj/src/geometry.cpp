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

#include "csaeo/geometry.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csaeo::geometry {

void GeometryParams::validate() const {
  if (earth_radius_km != kEarthRadiusKm) throw std::invalid_argument("earth radius must be 6378 km");
  if (!(altitude_km >= 0.0) || !std::isfinite(altitude_km)) throw std::invalid_argument("altitude must be >= 0");
  if (!(elevation_rad >= 0.0 && elevation_rad <= kPi / 2.0)) {
    throw std::invalid_argument("elevation must lie in [0, pi/2]");
  }
  if (!std::isfinite(radial_velocity_mps)) throw std::invalid_argument("radial velocity must be finite");
}

SlantRangeMode parse_slant_range_mode(std::string_view text) {
  if (text == "literal") return SlantRangeMode::Literal;
  if (text == "geometric") return SlantRangeMode::Geometric;
  throw std::invalid_argument("slant_range_mode must be 'literal' or 'geometric', got '" + std::string(text) + "'");
}

std::string_view to_string(SlantRangeMode mode) {
  return mode == SlantRangeMode::Literal ? "literal" : "geometric";
}

double slant_range_literal(const GeometryParams& params) {
  params.validate();
  const double re = params.earth_radius_km;
  const double rm = params.altitude_km;
  const double s = std::sin(params.elevation_rad);
  const double radicand = re * re * s * s + rm * rm + 2.0 * re * rm - 2.0 * re * rm * s;
  // 2*re*rm*(1 - s) >= 0 on the valid domain.
  assert(radicand >= 0.0);
  return std::sqrt(radicand);
}

double slant_range_geometric(const GeometryParams& params) {
  params.validate();
  const double re = params.earth_radius_km;
  const double rm = params.altitude_km;
  const double s = std::sin(params.elevation_rad);
  // sin rounds to exactly 1 near zenith, where the closed form collapses to rm.
  if (s == 1.0) return rm;
  // Rationalized to avoid cancellation between the root and re*s.
  const double root = std::sqrt(re * re * s * s + rm * rm + 2.0 * re * rm);
  return rm * (rm + 2.0 * re) / (root + re * s);
}

double slant_range_km(const GeometryParams& params, SlantRangeMode mode) {
  return mode == SlantRangeMode::Literal ? slant_range_literal(params) : slant_range_geometric(params);
}

double doppler_shift_hz(double carrier_hz, double radial_velocity_mps) {
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  return carrier_hz * radial_velocity_mps / kSpeedOfLightMps;
}

}  // namespace csaeo::geometry
