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

#include <cstdint>
#include <initializer_list>
#include <random>

namespace csaeo {

/// Every random draw in the library goes through an explicit stream of this type.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and a counter tuple. The mapping is
/// order-sensitive: (1, 2) and (2, 1) give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t k : keys) s = splitmix64(s ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return s;
}

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(master, keys));
}

/// Stream-domain tags so that distinct consumers of one master seed never collide.
enum class StreamTag : std::uint64_t {
  Data = 1,
  Split = 2,
  Init = 3,
  Shuffle = 4,
  Channel = 5,
  Shadow = 6,
  Flip = 7,
  Modem = 8,
};

inline Rng make_stream(std::uint64_t master, StreamTag tag, std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t s = derive_seed(master, {static_cast<std::uint64_t>(tag)});
  return Rng(derive_seed(s, keys));
}

}  // namespace csaeo
