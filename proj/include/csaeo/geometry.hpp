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

#include <string_view>

namespace csaeo::geometry {

inline constexpr double kEarthRadiusKm = 6378.0;
inline constexpr double kSpeedOfLightMps = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

struct GeometryParams {
  double earth_radius_km = kEarthRadiusKm;
  double altitude_km = 600.0;
  double elevation_rad = kPi / 2.0;
  /// Positive when the satellite moves toward the receiver.
  double radial_velocity_mps = 0.0;

  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;
};

enum class SlantRangeMode { Literal, Geometric };

SlantRangeMode parse_slant_range_mode(std::string_view text);
std::string_view to_string(SlantRangeMode mode);

/// sqrt(re^2 sin^2 + rm^2 + 2 re rm - 2 re rm sin), evaluated as written. It does not
/// reduce to the altitude at zenith.
double slant_range_literal(const GeometryParams& params);

/// Law-of-cosines slant range; equals altitude at 90 degrees elevation.
double slant_range_geometric(const GeometryParams& params);

double slant_range_km(const GeometryParams& params, SlantRangeMode mode);

/// Classical first-order Doppler, f * v / c.
double doppler_shift_hz(double carrier_hz, double radial_velocity_mps);

constexpr double deg_to_rad(double degrees) noexcept { return degrees * kPi / 180.0; }

}  // namespace csaeo::geometry
