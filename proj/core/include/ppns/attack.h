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

#ifndef PPNS_ATTACK_H_
#define PPNS_ATTACK_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "ppns/ratings.h"
#include "ppns/selection.h"

namespace ppns {

// Errors at or below this count as exact disclosure.
inline constexpr double kDisclosureTolerance = 1e-9;

struct AttackConfig {
  int32_t target = 0;
  int m = 8;         // ratings of the target known to the attacker
  int k_fakes = 50;  // normally policy.k
  SelectionPolicy policy;
  uint64_t seed = 0;
  int trials = 1;
  // Sensitivity for the observer's weights: recomputed (target-local) on the
  // augmented matrix by default; when false the target's own target-local
  // value on the original matrix is used.
  bool recompute_rs = true;
  std::optional<double> fixed_rs;
};

struct ForgedMatrix {
  RatingMatrix matrix;                  // original users keep their indices
  int32_t target = 0;
  std::vector<int32_t> fakes;           // dense indices in `matrix`
  std::vector<int32_t> known_items;     // copied to every fake
  std::vector<int32_t> sensitive_items; // target's remaining items
};

// Appends k_fakes users, each rating exactly the m known items of the
// target with the target's ratings. The known items are a seeded uniform
// draw from the target's profile. The input matrix is not modified.
absl::StatusOr<ForgedMatrix> ForgeProfiles(const RatingMatrix& matrix,
                                           const AttackConfig& config);

struct TrialOutcome {
  int32_t observer = 0;
  bool target_in_neighbours = false;
  bool sole_real_neighbour = false;  // target is the only real member
  double attack_mae = 0.0;
};

struct DisclosureReport {
  double target_in_neighbours = 0.0;  // fraction of trials
  double sole_real_neighbour = 0.0;   // fraction of trials
  double attack_mae = 0.0;            // mean over trials
  double disclosure_rate = 0.0;       // trials with attack_mae == 0
  int trials = 0;
  int n_sensitive = 0;
  std::vector<TrialOutcome> per_trial;
};

// Each trial picks a random fake as the observer, runs the policy on its
// candidate list and predicts every sensitive item for it. attack_mae is the
// mean absolute gap between those predictions and the target's true ratings,
// with per-item gaps within kDisclosureTolerance counted as 0.
absl::StatusOr<DisclosureReport> RunAttack(const RatingMatrix& matrix,
                                           const AttackConfig& config);

// Same, on an already forged matrix.
absl::StatusOr<DisclosureReport> RunAttack(const RatingMatrix& original,
                                           const ForgedMatrix& forged,
                                           const AttackConfig& config);

}  // namespace ppns

#endif  // PPNS_ATTACK_H_
