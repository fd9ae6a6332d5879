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

#ifndef PPNS_METRICS_H_
#define PPNS_METRICS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "absl/status/statusor.h"
#include "ppns/random.h"
#include "ppns/selection.h"
#include "ppns/similarity.h"

namespace ppns {

enum class AlphaSource { kWalleniusMean, kEnumeration, kEmpirical };

// Expected sum of the selected neighbours' similarities.
struct AccuracyEstimate {
  double alpha = 0.0;
  std::vector<double> per_partition;
  AlphaSource source = AlphaSource::kWalleniusMean;
  double standard_error = 0.0;  // empirical estimates only
};

// alpha = sum_i alpha_i, where alpha_i = sum_j sim_j mu_j over partition i
// and mu is the approximate Wallenius mean of drawing allocation[i] of the
// partition's k candidates (one category per candidate) with the selection
// weights.
absl::StatusOr<AccuracyEstimate> AlphaExpected(
    const SimilarityRow& row, const AllocationVector& allocation,
    const SelectionWeights& weights);

struct AllocationScore {
  AllocationVector allocation;
  double alpha = 0.0;
};

struct OptimalityReport {
  int k = 0;
  int beta = 0;
  std::vector<AllocationScore> scores;  // every feasible allocation
  AllocationScore best;
  double ppns_alpha = 0.0;
  bool ppns_optimal = false;  // attains the maximum, ties allowed
  int ties = 0;               // other allocations within tolerance of best
};

inline constexpr int kMaxOptimalityK = 6;
inline constexpr int kMaxOptimalityBeta = 5;

// Scores every feasible allocation (sum k, last >= 1, others <= k - 1) with
// AlphaExpected and checks that PpnsAllocation(k, beta) attains the max.
absl::StatusOr<OptimalityReport> VerifyAllocationOptimality(
    const SimilarityRow& row, int k, int beta,
    const SelectionWeights& weights);

// `k,beta,allocation,alpha`, allocation written as `4;0;1`.
void WriteOptimalityCsv(const OptimalityReport& report, std::ostream& out,
                        bool header = true);

using SelectionFn = std::function<absl::StatusOr<NeighbourSet>(Rng&)>;

// Monte-Carlo estimate: mean over trials of the true similarity sum of the
// selected set, trial t drawing from Rng(DeriveSeed(seed, {t})).
absl::StatusOr<AccuracyEstimate> AlphaEmpirical(const SelectionFn& select,
                                                const SimilarityRow& row,
                                                int trials, uint64_t seed);

}  // namespace ppns

#endif  // PPNS_METRICS_H_
