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

#ifndef PPNS_PREDICT_H_
#define PPNS_PREDICT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "ppns/ratings.h"
#include "ppns/selection.h"
#include "ppns/similarity.h"

namespace ppns {

struct Prediction {
  int32_t target = 0;
  int32_t item = 0;
  double value = 0.0;
  int neighbours_used = 0;
  // No neighbour rated the item (or their weights summed to zero); value is
  // the target's mean rating, or the global mean if the target has none.
  bool fallback = false;
};

// Similarity-weighted average of the neighbours' ratings on `item`:
//   r_hat = sum sim_i r_i / sum |sim_i|
// over neighbours who rated it. A held-out cell is invisible, including to
// the fallback means.
Prediction PredictRating(const RatingMatrix& matrix,
                         const NeighbourSet& neighbours, int32_t item,
                         std::optional<HeldOutCell> held_out = std::nullopt);

struct TargetBreakdown {
  int32_t target = 0;
  int64_t n = 0;
  double abs_error_sum = 0.0;
  double mae = 0.0;
};

struct EvaluationReport {
  double mae = 0.0;
  int64_t n_predictions = 0;
  int64_t n_fallback = 0;
  std::vector<TargetBreakdown> per_target;  // in the order targets were given
};

struct SensitivityOptions {
  // kTargetLocal is recomputed per evaluated cell with that cell masked;
  // kGlobal is computed once on the full matrix. kPairwise is rejected.
  SensitivityScope scope = SensitivityScope::kTargetLocal;
  std::optional<double> fixed_rs;  // overrides scope when set
};

struct EvaluationOptions {
  SensitivityOptions sensitivity;
  int threads = 1;
};

// Leave-one-out MAE: every rating of every target is predicted with that
// cell masked out of similarity, sensitivity and fallback computation.
// Policies are evaluated on the same candidate rows; each (policy, target,
// item) draws from Rng(DeriveSeed(policy.seed, {target, item})), so results
// do not depend on target order or thread count.
absl::StatusOr<std::vector<EvaluationReport>> EvaluateMae(
    const RatingMatrix& matrix, std::span<const SelectionPolicy> policies,
    std::span<const int32_t> targets, const EvaluationOptions& options = {});

absl::StatusOr<EvaluationReport> EvaluateMae(
    const RatingMatrix& matrix, const SelectionPolicy& policy,
    std::span<const int32_t> targets, const EvaluationOptions& options = {});

// `count` distinct users drawn uniformly with the given seed (all users when
// count >= num_users), in draw order.
std::vector<int32_t> SampleTargets(int32_t num_users, int32_t count,
                                   uint64_t seed);

}  // namespace ppns

#endif  // PPNS_PREDICT_H_
