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

#include "ppns/attack.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ppns/predict.h"
#include "ppns/random.h"
#include "ppns/similarity.h"

namespace ppns {

absl::StatusOr<ForgedMatrix> ForgeProfiles(const RatingMatrix& matrix,
                                           const AttackConfig& config) {
  if (matrix.axis() != Axis::kUserBased) {
    return absl::InvalidArgumentError(
        "the kNN attack is defined for user-based matrices only");
  }
  if (config.target < 0 || config.target >= matrix.num_users()) {
    return absl::InvalidArgumentError(
        absl::StrCat("no such target ", config.target));
  }
  const auto profile = matrix.UserRatings(config.target);
  if (config.m < 1 || static_cast<size_t>(config.m) > profile.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("m = ", config.m, " but the target rated ",
                     profile.size(), " items"));
  }
  if (config.k_fakes < 1) {
    return absl::InvalidArgumentError("need at least one fake user");
  }

  std::vector<Entry> shuffled(profile.begin(), profile.end());
  Rng rng(DeriveSeed(config.seed, {0x666f726765ULL}));
  for (int i = 0; i < config.m; ++i) {
    const auto j =
        i + static_cast<int>(rng.UniformIndex(shuffled.size() - i));
    std::swap(shuffled[i], shuffled[j]);
  }
  std::vector<Entry> known(shuffled.begin(), shuffled.begin() + config.m);
  std::sort(known.begin(), known.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });

  std::vector<RatingTriple> triples = matrix.Triples();
  int64_t next_id =
      matrix.num_users() > 0
          ? matrix.UserExternalId(matrix.num_users() - 1) + 1
          : 0;
  triples.reserve(triples.size() + known.size() * config.k_fakes);
  std::vector<int64_t> fake_ids;
  for (int f = 0; f < config.k_fakes; ++f) {
    fake_ids.push_back(next_id++);
    for (const Entry& e : known) {
      triples.push_back(
          {fake_ids.back(), matrix.ItemExternalId(e.index), e.rating});
    }
  }

  ForgedMatrix out;
  absl::StatusOr<RatingMatrix> augmented = RatingMatrix::FromTriples(triples);
  if (!augmented.ok()) return augmented.status();
  out.matrix = *std::move(augmented);
  out.target = config.target;
  for (int64_t id : fake_ids) out.fakes.push_back(*out.matrix.FindUser(id));
  for (const Entry& e : known) out.known_items.push_back(e.index);
  for (const Entry& e : profile) {
    if (!std::binary_search(out.known_items.begin(), out.known_items.end(),
                            e.index)) {
      out.sensitive_items.push_back(e.index);
    }
  }
  return out;
}

absl::StatusOr<DisclosureReport> RunAttack(const RatingMatrix& original,
                                           const ForgedMatrix& forged,
                                           const AttackConfig& config) {
  if (absl::Status s = ValidatePolicy(config.policy); !s.ok()) return s;
  if (config.trials < 1) {
    return absl::InvalidArgumentError("need at least one trial");
  }
  const RatingMatrix& m = forged.matrix;
  const bool needs_weights = config.policy.method != Method::kKnn;

  std::optional<SensitivityValue> frozen_rs;
  if (needs_weights) {
    if (config.fixed_rs) {
      frozen_rs = SensitivityValue{*config.fixed_rs, SensitivityScope::kGlobal};
    } else if (!config.recompute_rs) {
      absl::StatusOr<SensitivityValue> rs =
          TargetSensitivity(original, config.target);
      if (!rs.ok()) return rs.status();
      frozen_rs = *rs;
    }
  }

  std::vector<char> is_fake(m.num_users(), 0);
  for (int32_t f : forged.fakes) is_fake[f] = 1;

  DisclosureReport report;
  report.trials = config.trials;
  report.n_sensitive = static_cast<int>(forged.sensitive_items.size());
  for (int t = 0; t < config.trials; ++t) {
    Rng rng(DeriveSeed(config.seed, {static_cast<uint64_t>(t)}));
    TrialOutcome outcome;
    outcome.observer = forged.fakes[rng.UniformIndex(forged.fakes.size())];
    const SimilarityRow row = ComputeSimilarityRow(m, outcome.observer);

    SelectionWeights weights;
    if (needs_weights) {
      SensitivityValue rs;
      if (frozen_rs) {
        rs = *frozen_rs;
      } else {
        absl::StatusOr<SensitivityValue> local =
            TargetSensitivity(m, outcome.observer);
        if (!local.ok()) return local.status();
        rs = *local;
      }
      absl::StatusOr<SelectionWeights> w = ComputeSelectionWeights(
          row, config.policy.epsilon, config.policy.k, rs);
      if (!w.ok()) return w.status();
      weights = *std::move(w);
    }
    absl::StatusOr<NeighbourSet> set =
        SelectNeighbours(row, config.policy, weights, rng);
    if (!set.ok()) return set.status();

    bool only_target_real = true;
    for (const Neighbour& n : set->members) {
      if (n.user == forged.target) {
        outcome.target_in_neighbours = true;
      } else if (!is_fake[n.user]) {
        only_target_real = false;
      }
    }
    outcome.sole_real_neighbour =
        outcome.target_in_neighbours && only_target_real;

    double error = 0.0;
    for (int32_t item : forged.sensitive_items) {
      const Prediction p = PredictRating(m, *set, item);
      const double truth = *m.Rating(forged.target, item);
      const double gap = std::fabs(p.value - truth);
      error += gap <= kDisclosureTolerance ? 0.0 : gap;
    }
    if (!forged.sensitive_items.empty()) {
      outcome.attack_mae = error / forged.sensitive_items.size();
    }

    report.target_in_neighbours += outcome.target_in_neighbours;
    report.sole_real_neighbour += outcome.sole_real_neighbour;
    report.attack_mae += outcome.attack_mae;
    report.disclosure_rate += outcome.attack_mae == 0.0;
    report.per_trial.push_back(outcome);
  }
  report.target_in_neighbours /= config.trials;
  report.sole_real_neighbour /= config.trials;
  report.attack_mae /= config.trials;
  report.disclosure_rate /= config.trials;
  return report;
}

absl::StatusOr<DisclosureReport> RunAttack(const RatingMatrix& matrix,
                                           const AttackConfig& config) {
  absl::StatusOr<ForgedMatrix> forged = ForgeProfiles(matrix, config);
  if (!forged.ok()) return forged.status();
  return RunAttack(matrix, *forged, config);
}

}  // namespace ppns
