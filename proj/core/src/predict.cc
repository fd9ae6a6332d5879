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

#include "ppns/predict.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ppns/parallel.h"
#include "ppns/random.h"

namespace ppns {
namespace {

double FallbackValue(const RatingMatrix& matrix, int32_t target,
                     const std::optional<HeldOutCell>& held_out) {
  double sum = matrix.UserRatingSum(target);
  double count = static_cast<double>(matrix.UserRatings(target).size());
  double global_sum = matrix.GlobalRatingSum();
  double global_count = static_cast<double>(matrix.num_ratings());
  if (held_out) {
    if (auto r = matrix.Rating(held_out->user, held_out->item)) {
      if (held_out->user == target) {
        sum -= *r;
        count -= 1;
      }
      global_sum -= *r;
      global_count -= 1;
    }
  }
  if (count > 0) return sum / count;
  return global_count > 0 ? global_sum / global_count : 0.0;
}

bool NeedsWeights(const SelectionPolicy& policy) {
  return policy.method != Method::kKnn;
}

}  // namespace

Prediction PredictRating(const RatingMatrix& matrix,
                         const NeighbourSet& neighbours, int32_t item,
                         std::optional<HeldOutCell> held_out) {
  Prediction p;
  p.target = neighbours.target;
  p.item = item;
  double numerator = 0.0;
  double denominator = 0.0;
  for (const Neighbour& n : neighbours.members) {
    if (held_out && held_out->user == n.user && held_out->item == item) {
      continue;
    }
    const std::optional<int> r = matrix.Rating(n.user, item);
    if (!r) continue;
    ++p.neighbours_used;
    numerator += n.sim * *r;
    denominator += std::fabs(n.sim);
  }
  if (p.neighbours_used > 0 && denominator > 0.0) {
    p.value = numerator / denominator;
  } else {
    p.fallback = true;
    p.value = FallbackValue(matrix, neighbours.target, held_out);
  }
  return p;
}

absl::StatusOr<std::vector<EvaluationReport>> EvaluateMae(
    const RatingMatrix& matrix, std::span<const SelectionPolicy> policies,
    std::span<const int32_t> targets, const EvaluationOptions& options) {
  if (policies.empty()) {
    return absl::InvalidArgumentError("no policies to evaluate");
  }
  bool any_weights = false;
  for (const SelectionPolicy& p : policies) {
    if (absl::Status s = ValidatePolicy(p); !s.ok()) return s;
    any_weights = any_weights || NeedsWeights(p);
  }
  for (int32_t t : targets) {
    if (t < 0 || t >= matrix.num_users()) {
      return absl::InvalidArgumentError(absl::StrCat("no such target ", t));
    }
  }
  const SensitivityOptions& sens = options.sensitivity;
  std::optional<SensitivityValue> shared_rs;
  if (sens.fixed_rs) {
    if (!(*sens.fixed_rs > 0.0)) {
      return absl::InvalidArgumentError("fixed sensitivity must be positive");
    }
    shared_rs = SensitivityValue{*sens.fixed_rs, SensitivityScope::kGlobal};
  } else if (sens.scope == SensitivityScope::kPairwise) {
    return absl::InvalidArgumentError(
        "pairwise sensitivity has no meaning for a whole evaluation; use "
        "target-local or global");
  } else if (sens.scope == SensitivityScope::kGlobal && any_weights) {
    absl::StatusOr<SensitivityValue> g = GlobalSensitivity(matrix);
    if (!g.ok()) return g.status();
    shared_rs = *g;
  }

  // Weights depend only on (epsilon, k); share them across policies.
  std::vector<std::pair<double, int>> weight_keys;
  std::vector<int> weight_slot(policies.size(), -1);
  for (size_t p = 0; p < policies.size(); ++p) {
    if (!NeedsWeights(policies[p])) continue;
    const std::pair<double, int> key{policies[p].epsilon, policies[p].k};
    auto it = std::find(weight_keys.begin(), weight_keys.end(), key);
    weight_slot[p] = static_cast<int>(it - weight_keys.begin());
    if (it == weight_keys.end()) weight_keys.push_back(key);
  }

  const size_t n_policies = policies.size();
  // slots[target_pos * n_policies + policy]
  std::vector<TargetBreakdown> slots(targets.size() * n_policies);
  std::vector<int64_t> fallbacks(targets.size() * n_policies, 0);
  std::vector<absl::Status> errors(targets.size());

  ParallelFor(targets.size(), options.threads, [&](size_t pos) {
    const int32_t target = targets[pos];
    std::vector<SelectionWeights> weights(weight_keys.size());
    for (const Entry& cell : matrix.UserRatings(target)) {
      const HeldOutCell held{target, cell.index};
      const SimilarityRow row = ComputeSimilarityRow(matrix, target, held);
      if (!weight_keys.empty()) {
        SensitivityValue rs;
        if (shared_rs) {
          rs = *shared_rs;
        } else {
          absl::StatusOr<SensitivityValue> local =
              TargetSensitivity(matrix, target, held);
          if (!local.ok()) {
            errors[pos] = local.status();
            return;
          }
          rs = *local;
        }
        for (size_t w = 0; w < weight_keys.size(); ++w) {
          absl::StatusOr<SelectionWeights> sw = ComputeSelectionWeights(
              row, weight_keys[w].first, weight_keys[w].second, rs);
          if (!sw.ok()) {
            errors[pos] = sw.status();
            return;
          }
          weights[w] = *std::move(sw);
        }
      }
      for (size_t p = 0; p < n_policies; ++p) {
        const SelectionPolicy& policy = policies[p];
        Rng rng(DeriveSeed(policy.seed, {static_cast<uint64_t>(target),
                                         static_cast<uint64_t>(cell.index)}));
        static const SelectionWeights kNoWeights;
        const SelectionWeights& w =
            weight_slot[p] >= 0 ? weights[weight_slot[p]] : kNoWeights;
        absl::StatusOr<NeighbourSet> set =
            SelectNeighbours(row, policy, w, rng);
        if (!set.ok()) {
          errors[pos] = set.status();
          return;
        }
        const Prediction pred = PredictRating(matrix, *set, cell.index, held);
        TargetBreakdown& slot = slots[pos * n_policies + p];
        slot.n += 1;
        slot.abs_error_sum += std::fabs(pred.value - cell.rating);
        if (pred.fallback) ++fallbacks[pos * n_policies + p];
      }
    }
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }

  std::vector<EvaluationReport> reports(n_policies);
  for (size_t p = 0; p < n_policies; ++p) {
    EvaluationReport& report = reports[p];
    double total = 0.0;
    for (size_t pos = 0; pos < targets.size(); ++pos) {
      TargetBreakdown slot = slots[pos * n_policies + p];
      slot.target = targets[pos];
      slot.mae = slot.n > 0 ? slot.abs_error_sum / slot.n : 0.0;
      total += slot.abs_error_sum;
      report.n_predictions += slot.n;
      report.n_fallback += fallbacks[pos * n_policies + p];
      report.per_target.push_back(slot);
    }
    if (report.n_predictions == 0) {
      return absl::InvalidArgumentError(
          "no rated cells among the evaluation targets");
    }
    report.mae = total / static_cast<double>(report.n_predictions);
  }
  return reports;
}

absl::StatusOr<EvaluationReport> EvaluateMae(
    const RatingMatrix& matrix, const SelectionPolicy& policy,
    std::span<const int32_t> targets, const EvaluationOptions& options) {
  absl::StatusOr<std::vector<EvaluationReport>> reports =
      EvaluateMae(matrix, std::span(&policy, 1), targets, options);
  if (!reports.ok()) return reports.status();
  return std::move(reports->front());
}

std::vector<int32_t> SampleTargets(int32_t num_users, int32_t count,
                                   uint64_t seed) {
  std::vector<int32_t> users(num_users);
  std::iota(users.begin(), users.end(), 0);
  const int32_t take = std::min(count, num_users);
  Rng rng(seed);
  for (int32_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<int32_t>(rng.UniformIndex(num_users - i));
    std::swap(users[i], users[j]);
  }
  users.resize(take);
  return users;
}

}  // namespace ppns
