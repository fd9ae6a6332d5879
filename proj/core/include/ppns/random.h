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

#ifndef PPNS_RANDOM_H_
#define PPNS_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ppns {

// Portable, seedable random stream. All conversions from raw bits are done
// here rather than through <random> distributions, whose output is
// implementation-defined, so a given seed yields the same stream on every
// standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextBits() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double Uniform();

  // Standard exponential, mean 1.
  double Exponential();

  // Zero-mean Laplace with the given scale b > 0.
  double Laplace(double scale);

  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformIndex(uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
uint64_t MixSeed(uint64_t x);

// Derives an independent stream seed from a master seed and a task path,
// e.g. DeriveSeed(master, {target, item}). Order of the path matters.
uint64_t DeriveSeed(uint64_t master, std::initializer_list<uint64_t> path);

}  // namespace ppns

#endif  // PPNS_RANDOM_H_
