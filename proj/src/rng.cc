//
// Copyright 2026 The Salad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "salad/rng.h"

#include <cmath>
#include <numbers>

namespace salad {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double Rng::Normal() {
  double u1 = UniformReal();
  while (u1 <= 0.0) u1 = UniformReal();
  const double u2 = UniformReal();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t DeriveSeed(std::uint64_t base,
                         std::initializer_list<std::string_view> parts,
                         std::initializer_list<std::uint64_t> numbers) {
  std::uint64_t h = SplitMix64(base);
  for (std::string_view p : parts) {
    h = SplitMix64(Fnv1a(p, h ^ 0xcbf29ce484222325ULL));
  }
  for (std::uint64_t n : numbers) h = SplitMix64(h ^ SplitMix64(n));
  return h;
}

}  // namespace salad
