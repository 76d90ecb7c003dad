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

#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "csaeo/geometry.hpp"

using namespace csaeo::geometry;

namespace {
GeometryParams at(double altitude_km, double elevation_deg) {
  GeometryParams p;
  p.altitude_km = altitude_km;
  p.elevation_rad = deg_to_rad(elevation_deg);
  return p;
}
}  // namespace

TEST_CASE("verbatim slant range") {
  CHECK(slant_range_literal(at(600, 90)) == doctest::Approx(6406.16).epsilon(1e-6));
  CHECK(slant_range_literal(at(600, 0)) == doctest::Approx(2830.83).epsilon(1e-6));
  for (double el : {0.0, 17.0, 45.0, 90.0}) {
    CHECK(slant_range_literal(at(0, el)) == doctest::Approx(kEarthRadiusKm * std::sin(deg_to_rad(el))));
  }
}

TEST_CASE("corrected slant range") {
  CHECK(slant_range_geometric(at(600, 90)) == 600.0);
  CHECK(slant_range_geometric(at(600, 0)) == doctest::Approx(2830.83).epsilon(1e-6));
  CHECK(slant_range_geometric(at(600, 30)) == doctest::Approx(1075.19).epsilon(1e-6));
}

TEST_CASE("nadir identity and agreement at the horizon over an altitude grid") {
  for (int i = 0; i < 100; ++i) {
    const double h = 5.0 + 40.0 * i;
    CHECK(slant_range_geometric(at(h, 90)) == h);
    const double a = slant_range_literal(at(h, 0));
    const double b = slant_range_geometric(at(h, 0));
    CHECK(std::abs(a - b) / a < 1e-9);
  }
}

TEST_CASE("corrected form decreases with elevation") {
  double prev = slant_range_geometric(at(600, 0));
  for (int d = 1; d <= 90; ++d) {
    const double cur = slant_range_geometric(at(600, d));
    CHECK(cur < prev);
    CHECK(cur > 0.0);
    prev = cur;
  }
}

TEST_CASE("mode switch") {
  CHECK(slant_range_km(at(600, 90), SlantRangeMode::Literal) == slant_range_literal(at(600, 90)));
  CHECK(slant_range_km(at(600, 90), SlantRangeMode::Geometric) == 600.0);
  CHECK(parse_slant_range_mode("literal") == SlantRangeMode::Literal);
  CHECK(parse_slant_range_mode("geometric") == SlantRangeMode::Geometric);
  CHECK_THROWS_AS(parse_slant_range_mode("round"), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  GeometryParams p;
  p.altitude_km = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = GeometryParams{};
  p.elevation_rad = 2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = GeometryParams{};
  p.earth_radius_km = 6371.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("doppler shift") {
  CHECK(doppler_shift_hz(28e9, 0.0) == 0.0);
  CHECK(doppler_shift_hz(28e9, 7000.0) == doctest::Approx(653.8e3).epsilon(1e-4));
  CHECK(doppler_shift_hz(28e9, -7000.0) == -doppler_shift_hz(28e9, 7000.0));
  CHECK(doppler_shift_hz(2 * 28e9, 7000.0) == doctest::Approx(2 * doppler_shift_hz(28e9, 7000.0)));
  CHECK(doppler_shift_hz(28e9, 3 * 7000.0) == doctest::Approx(3 * doppler_shift_hz(28e9, 7000.0)));
  CHECK_THROWS_AS(doppler_shift_hz(0.0, 1.0), std::invalid_argument);
}
