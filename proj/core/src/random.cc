//
// Copyright 2026 The PPNS Authors
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

#include "ppns/random.h"

#include <cmath>

namespace ppns {

double Rng::Uniform() {
  // 53 random mantissa bits, shifted off zero by half an ulp.
  const uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::Exponential() { return -std::log(Uniform()); }

double Rng::Laplace(double scale) {
  const double u = Uniform() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::fabs(u));
  return u < 0 ? -magnitude : magnitude;
}

uint64_t Rng::UniformIndex(uint64_t n) {
  // Rejection sampling on the top of the range keeps this unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t master, std::initializer_list<uint64_t> path) {
  uint64_t state = MixSeed(master);
  for (uint64_t step : path) {
    state = MixSeed(state ^ MixSeed(step + 0x632be59bd9b4e019ULL));
  }
  return state;
}

}  // namespace ppns
