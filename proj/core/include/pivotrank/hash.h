// Copyright 2026 The Pivotrank Authors.
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

#ifndef PIVOTRANK_HASH_H_
#define PIVOTRANK_HASH_H_

#include <cstdint>
#include <string_view>

namespace pivotrank {

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

constexpr std::uint64_t Fnv1a64(std::string_view bytes,
                                std::uint64_t state = kFnvOffset) {
  for (const char c : bytes) {
    state ^= static_cast<unsigned char>(c);
    state *= 0x100000001b3ULL;
  }
  return state;
}

// SplitMix64 finalizer; a bijective mixer used as a counter-based generator.
constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in the open interval (0, 1) from the top 53 bits.
constexpr double ToUnitOpen(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Deterministic standard normal draw for a 64-bit key (Box-Muller over two
// counter-derived uniforms).
double CounterNormal(std::uint64_t key);

}  // namespace pivotrank

#endif  // PIVOTRANK_HASH_H_
