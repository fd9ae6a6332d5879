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

#ifndef PPNS_WALLENIUS_H_
#define PPNS_WALLENIUS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "ppns/random.h"

namespace ppns {

// Weights below this are raised to it before solving; the mean equation is
// only defined for strictly positive weights.
inline constexpr double kMinWalleniusWeight = 1e-12;

struct Category {
  int64_t size = 1;     // m_i > 0
  double weight = 1.0;  // omega_i > 0
};

struct Population {
  std::vector<Category> categories;
  int64_t draws = 0;  // 0 <= draws <= sum of sizes
};

struct MeanVector {
  std::vector<double> mu;
  // Common value of (1 - mu_i / m_i)^(1 / omega_i), in [0, 1].
  double t = 1.0;
};

// Approximate mean of Wallenius' multivariate noncentral hypergeometric
// distribution: the mu with
//
//   (1 - mu_1/m_1)^(1/w_1) = ... = (1 - mu_c/m_c)^(1/w_c),  sum mu_i = draws.
//
// Writing the common value as t = exp(-s) gives mu_i = m_i (1 - exp(-w_i s)),
// which is strictly increasing in s, so s is found by bracketed bisection.
// Exact when all weights are equal. Weights are scale-free: multiplying all
// of them by a constant leaves mu unchanged.
absl::StatusOr<MeanVector> WalleniusMean(const Population& population);

struct WeightedItem {
  int32_t id = 0;
  double weight = 1.0;
};

// Draws k distinct items one at a time, each draw proportional to the
// weights still in the urn. Returned in draw order.
//
// Implemented as an exponential race: item i finishes at E_i / w_i with
// E_i ~ Exp(1), and the first k finishers in order have exactly the law of
// the sequential draws. Working with log keys keeps it stable for weights
// that would overflow.
absl::StatusOr<std::vector<int32_t>> WeightedSampleWithoutReplacement(
    std::span<const WeightedItem> items, int k, Rng& rng);
absl::StatusOr<std::vector<int32_t>> WeightedSampleWithoutReplacement(
    std::span<const WeightedItem> items, int k, uint64_t seed);

// Same draw on positions 0..n-1 given log-weights. Caller guarantees
// 0 <= k <= log_weights.size(); consumes exactly log_weights.size()
// variates from rng.
std::vector<size_t> SampleByLogWeight(std::span<const double> log_weights,
                                      int k, Rng& rng);

inline constexpr size_t kMaxExactItems = 12;

// Probability of each final k-subset under sequential weighted draws,
// indexed by bitmask over item positions. Sums path probabilities over
// every draw order.
absl::StatusOr<std::vector<double>> ExactSubsetProbabilities(
    std::span<const WeightedItem> items, int k);

// Per-item inclusion probabilities (aligned with items); they sum to k.
absl::StatusOr<std::vector<double>> ExactInclusionProbabilities(
    std::span<const WeightedItem> items, int k);

}  // namespace ppns

#endif  // PPNS_WALLENIUS_H_
