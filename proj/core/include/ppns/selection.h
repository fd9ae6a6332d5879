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

#ifndef PPNS_SELECTION_H_
#define PPNS_SELECTION_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ppns/random.h"
#include "ppns/similarity.h"

namespace ppns {

enum class Method { kKnn, kNpns, kPncf, kPpns };

std::string_view MethodName(Method method);
absl::StatusOr<Method> ParseMethod(std::string_view name);

// How PNCF picks its truncation width lambda.
//   kFormula: lambda = min(sim_k, (4 k rs / eps) ln(k (n - k) / rho))
//   kAttack:  lambda = sim_k - sim_{beta k}, i.e. the eligible pool is the
//             top beta*k candidates.
enum class LambdaMode { kFormula, kAttack };

// beta value meaning "the whole candidate list" (global randomness).
inline constexpr int kUnboundedBeta = std::numeric_limits<int>::max();

struct SelectionPolicy {
  Method method = Method::kPpns;
  int k = 1;
  double epsilon = 1.0;
  int beta = 1;
  LambdaMode lambda_mode = LambdaMode::kAttack;
  double rho = 0.5;
  // Scale of the Laplace noise PNCF adds to the chosen neighbours'
  // similarities. Unset means 2 rs / epsilon; 0 disables the noise.
  std::optional<double> pncf_laplace_scale;
  uint64_t seed = 0;
};

absl::Status ValidatePolicy(const SelectionPolicy& policy);

struct Neighbour {
  int32_t user = 0;
  double sim = 0.0;       // similarity used for prediction
  int32_t rank = 0;       // position in the candidate list
  int32_t partition = 0;  // rank / k

  friend bool operator==(const Neighbour&, const Neighbour&) = default;
};

// Members are ordered by rank.
struct NeighbourSet {
  int32_t target = 0;
  std::vector<Neighbour> members;
  // PNCF only: the band held fewer candidates than needed and the rest was
  // filled from the nearest remaining ones.
  bool band_fallback = false;

  friend bool operator==(const NeighbourSet&, const NeighbourSet&) = default;
};

// Neighbours drawn per partition, partitions being consecutive blocks of k
// candidates.
using AllocationVector = std::vector<int>;

// The accuracy-optimal allocation for security level beta: k - 1 draws
// from the first partition and one from partition beta ([k] when beta is 1).
// Requires k >= 1 and beta >= 1.
AllocationVector PpnsAllocation(int k, int beta);

// sum f = k, f.back() >= 1, every other entry in [0, k - 1].
bool IsFeasibleAllocation(const AllocationVector& allocation, int k);

absl::StatusOr<NeighbourSet> SelectKnn(const SimilarityRow& row, int k);

// Partitions the row into blocks of k, then draws PpnsAllocation(k, beta)[i]
// members from block i by weighted sampling without replacement.
absl::StatusOr<NeighbourSet> SelectPpns(const SimilarityRow& row,
                                        const SelectionPolicy& policy,
                                        const SelectionWeights& weights,
                                        Rng& rng);

// Weighted sample of k from the top beta*k candidates (all of them for
// kUnboundedBeta).
absl::StatusOr<NeighbourSet> SelectNpns(const SimilarityRow& row, int k,
                                        int beta,
                                        const SelectionWeights& weights,
                                        Rng& rng);

absl::StatusOr<double> PncfLambda(const SimilarityRow& row,
                                  const SelectionPolicy& policy,
                                  SensitivityValue rs);

// Keeps every candidate above sim_k + lambda, fills the rest by weighted
// sampling from [sim_k - lambda, sim_k + lambda], then perturbs the chosen
// similarities with Laplace noise clamped at 0.
absl::StatusOr<NeighbourSet> SelectPncf(const SimilarityRow& row,
                                        const SelectionPolicy& policy,
                                        const SelectionWeights& weights,
                                        Rng& rng);

// Dispatches on policy.method. kNN ignores weights and rng.
absl::StatusOr<NeighbourSet> SelectNeighbours(const SimilarityRow& row,
                                              const SelectionPolicy& policy,
                                              const SelectionWeights& weights,
                                              Rng& rng);

}  // namespace ppns

#endif  // PPNS_SELECTION_H_
