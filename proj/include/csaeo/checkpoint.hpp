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

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "csaeo/dtjscc.hpp"
#include "csaeo/semaug.hpp"

namespace csaeo::checkpoint {

inline constexpr std::uint32_t kFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  dtjscc::Codec codec;
  std::optional<semaug::CovariancePredictor> predictor;
};

/// "DTJC", version, dimension header, then little-endian f64 blocks (extractor, codebook,
/// decoder) and an optional predictor block.
std::string encode(const dtjscc::Codec& codec, const semaug::CovariancePredictor* predictor = nullptr);
Checkpoint decode(std::string_view bytes);

void save(const std::filesystem::path& path, const dtjscc::Codec& codec,
          const semaug::CovariancePredictor* predictor = nullptr);
Checkpoint load(const std::filesystem::path& path);

}  // namespace csaeo::checkpoint
