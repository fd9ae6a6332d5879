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

#ifndef PPNS_SIMILARITY_H_
#define PPNS_SIMILARITY_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "ppns/ratings.h"

namespace ppns {

struct Candidate {
  int32_t user = 0;
  double sim = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// A target's candidate list: every other user, sorted by descending
// similarity with ties broken by ascending user index.
struct SimilarityRow {
  int32_t target = 0;
  std::vector<Candidate> candidates;

  int32_t size() const { return static_cast<int32_t>(candidates.size()); }
};

// Cosine similarity over raw ratings. The numerator runs over co-rated
// items, the norms over each user's full profile. Users without ratings
// have similarity 0 with everyone. A held-out cell is treated as unrated.
double CosineSimilarity(const RatingMatrix& matrix, int32_t i, int32_t j,
                        std::optional<HeldOutCell> held_out = std::nullopt);

SimilarityRow ComputeSimilarityRow(
    const RatingMatrix& matrix, int32_t target,
    std::optional<HeldOutCell> held_out = std::nullopt);

enum class SensitivityScope { kPairwise, kTargetLocal, kGlobal };

struct SensitivityValue {
  double rs = 0.0;
  SensitivityScope scope = SensitivityScope::kTargetLocal;
};

// Recommendation-aware sensitivity of the similarity score. For a user pair
// (i, j) and each co-rated item s, with primed norms taken over the profile
// with s removed:
//
//   term1 = r_is r_js / (|r_i'| |r_j'|)
//   term2 = r_is r_js (|r_i||r_j| - |r_i'||r_j'|) / (|r_i||r_j||r_i'||r_j'|)
//
// and the sensitivity is the maximum of both terms over s and over the
// pairs in scope. Pairs with fewer than two co-rated items are skipped.
// Returns FailedPrecondition when no pair qualifies; callers should then
// supply a fixed value.
absl::StatusOr<SensitivityValue> PairSensitivity(
    const RatingMatrix& matrix, int32_t i, int32_t j,
    std::optional<HeldOutCell> held_out = std::nullopt);
absl::StatusOr<SensitivityValue> TargetSensitivity(
    const RatingMatrix& matrix, int32_t target,
    std::optional<HeldOutCell> held_out = std::nullopt);
absl::StatusOr<SensitivityValue> GlobalSensitivity(const RatingMatrix& matrix);

// Exponential-mechanism selection weights
//   omega_i = exp(epsilon * sim_i / (4 k rs)),
// index-aligned with row.candidates. The logs are kept alongside because
// the weights overflow double for large epsilon / rs ratios.
struct SelectionWeights {
  std::vector<double> omega;
  std::vector<double> log_omega;
  double epsilon = 0.0;
  int k = 0;
  SensitivityValue rs;
};

absl::StatusOr<SelectionWeights> ComputeSelectionWeights(
    const SimilarityRow& row, double epsilon, int k, SensitivityValue rs);

// Cache format: `target,candidate,sim` with external ids and 12 significant
// digits.
void WriteSimilarityRowsCsv(const RatingMatrix& matrix,
                            std::span<const SimilarityRow> rows,
                            std::ostream& out);

}  // namespace ppns

#endif  // PPNS_SIMILARITY_H_
