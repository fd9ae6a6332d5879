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

#include "ppns/selection.h"

#include <algorithm>
#include <cmath>
#include <span>

#include "absl/strings/str_cat.h"
#include "ppns/wallenius.h"

namespace ppns {
namespace {

Neighbour MakeNeighbour(const SimilarityRow& row, int32_t rank, int k) {
  const Candidate& c = row.candidates[rank];
  return Neighbour{c.user, c.sim, rank, rank / k};
}

void SortByRank(NeighbourSet& set) {
  std::sort(set.members.begin(), set.members.end(),
            [](const Neighbour& a, const Neighbour& b) {
              return a.rank < b.rank;
            });
}

absl::Status CheckWeights(const SimilarityRow& row,
                          const SelectionWeights& weights) {
  if (weights.log_omega.size() != row.candidates.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("selection weights cover ", weights.log_omega.size(),
                     " candidates, row has ", row.candidates.size()));
  }
  return absl::OkStatus();
}

absl::Status CheckPoolSize(const SimilarityRow& row, int k, int beta) {
  const int64_t needed = static_cast<int64_t>(k) * beta;
  if (row.size() < needed) {
    return absl::InvalidArgumentError(absl::StrCat(
        "beta * k = ", needed, " exceeds the ", row.size(),
        " candidates of target ", row.target,
        "; keep beta <= floor(n / (2k)) so every partition is populated"));
  }
  return absl::OkStatus();
}

// Weighted draw of `count` ranks from [begin, end).
std::vector<int32_t> DrawRanks(const SelectionWeights& weights, int32_t begin,
                               int32_t end, int count, Rng& rng) {
  std::span<const double> block(weights.log_omega.data() + begin, end - begin);
  std::vector<int32_t> ranks;
  ranks.reserve(count);
  for (size_t pos : SampleByLogWeight(block, count, rng)) {
    ranks.push_back(begin + static_cast<int32_t>(pos));
  }
  return ranks;
}

}  // namespace

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kKnn:
      return "knn";
    case Method::kNpns:
      return "npns";
    case Method::kPncf:
      return "pncf";
    case Method::kPpns:
      return "ppns";
  }
  return "unknown";
}

absl::StatusOr<Method> ParseMethod(std::string_view name) {
  for (Method m : {Method::kKnn, Method::kNpns, Method::kPncf, Method::kPpns}) {
    if (MethodName(m) == name) return m;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown method `", std::string(name),
                   "` (knn, npns, pncf, ppns)"));
}

absl::Status ValidatePolicy(const SelectionPolicy& policy) {
  if (policy.k < 1) return absl::InvalidArgumentError("k must be at least 1");
  if (policy.beta < 1) {
    return absl::InvalidArgumentError("beta must be at least 1");
  }
  if (!(policy.epsilon > 0.0) || !std::isfinite(policy.epsilon)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  if (!(policy.rho > 0.0 && policy.rho < 1.0)) {
    return absl::InvalidArgumentError("rho must lie in (0, 1)");
  }
  if (policy.pncf_laplace_scale && !(*policy.pncf_laplace_scale >= 0.0)) {
    return absl::InvalidArgumentError("Laplace scale must be non-negative");
  }
  if (policy.method == Method::kPpns && policy.beta == kUnboundedBeta) {
    return absl::InvalidArgumentError("PPNS needs a finite beta");
  }
  return absl::OkStatus();
}

AllocationVector PpnsAllocation(int k, int beta) {
  if (beta == 1) return {k};
  AllocationVector f(beta, 0);
  f.front() = k - 1;
  f.back() = 1;
  return f;
}

bool IsFeasibleAllocation(const AllocationVector& allocation, int k) {
  if (allocation.empty() || k < 1) return false;
  int sum = 0;
  for (size_t i = 0; i < allocation.size(); ++i) {
    const int f = allocation[i];
    const bool last = i + 1 == allocation.size();
    if (last ? (f < 1 || f > k) : (f < 0 || f > k - 1)) return false;
    sum += f;
  }
  return sum == k;
}

absl::StatusOr<NeighbourSet> SelectKnn(const SimilarityRow& row, int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  if (row.size() < k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "target ", row.target, " has ", row.size(), " candidates, k = ", k));
  }
  NeighbourSet set;
  set.target = row.target;
  set.members.reserve(k);
  for (int32_t rank = 0; rank < k; ++rank) {
    set.members.push_back(MakeNeighbour(row, rank, k));
  }
  return set;
}

absl::StatusOr<NeighbourSet> SelectPpns(const SimilarityRow& row,
                                        const SelectionPolicy& policy,
                                        const SelectionWeights& weights,
                                        Rng& rng) {
  if (absl::Status s = ValidatePolicy(policy); !s.ok()) return s;
  const int k = policy.k;
  if (absl::Status s = CheckPoolSize(row, k, policy.beta); !s.ok()) return s;
  if (absl::Status s = CheckWeights(row, weights); !s.ok()) return s;

  const AllocationVector allocation = PpnsAllocation(k, policy.beta);
  NeighbourSet set;
  set.target = row.target;
  set.members.reserve(k);
  for (int partition = 0; partition < policy.beta; ++partition) {
    const int draws = allocation[partition];
    if (draws == 0) continue;
    const int32_t begin = partition * k;
    const int32_t end = begin + k;
    if (draws == k) {
      for (int32_t rank = begin; rank < end; ++rank) {
        set.members.push_back(MakeNeighbour(row, rank, k));
      }
      continue;
    }
    for (int32_t rank : DrawRanks(weights, begin, end, draws, rng)) {
      set.members.push_back(MakeNeighbour(row, rank, k));
    }
  }
  SortByRank(set);
  return set;
}

absl::StatusOr<NeighbourSet> SelectNpns(const SimilarityRow& row, int k,
                                        int beta,
                                        const SelectionWeights& weights,
                                        Rng& rng) {
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  if (beta < 1) return absl::InvalidArgumentError("beta must be at least 1");
  int32_t pool = row.size();
  if (beta != kUnboundedBeta) {
    if (absl::Status s = CheckPoolSize(row, k, beta); !s.ok()) return s;
    pool = k * beta;
  } else if (row.size() < k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "target ", row.target, " has ", row.size(), " candidates, k = ", k));
  }
  if (absl::Status s = CheckWeights(row, weights); !s.ok()) return s;

  NeighbourSet set;
  set.target = row.target;
  for (int32_t rank : DrawRanks(weights, 0, pool, k, rng)) {
    set.members.push_back(MakeNeighbour(row, rank, k));
  }
  SortByRank(set);
  return set;
}

absl::StatusOr<double> PncfLambda(const SimilarityRow& row,
                                  const SelectionPolicy& policy,
                                  SensitivityValue rs) {
  const int k = policy.k;
  if (row.size() < k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "target ", row.target, " has ", row.size(), " candidates, k = ", k));
  }
  const double sim_k = row.candidates[k - 1].sim;
  if (policy.lambda_mode == LambdaMode::kAttack) {
    int32_t last = row.size() - 1;
    if (policy.beta != kUnboundedBeta) {
      if (absl::Status s = CheckPoolSize(row, k, policy.beta); !s.ok()) {
        return s;
      }
      last = k * policy.beta - 1;
    }
    return sim_k - row.candidates[last].sim;
  }
  const int64_t n = row.size();
  if (n <= k) return 0.0;
  if (!(rs.rs > 0.0)) {
    return absl::InvalidArgumentError("sensitivity must be positive");
  }
  const double width = 4.0 * k * rs.rs / policy.epsilon *
                       std::log(static_cast<double>(k) *
                                static_cast<double>(n - k) / policy.rho);
  return std::min(sim_k, width);
}

absl::StatusOr<NeighbourSet> SelectPncf(const SimilarityRow& row,
                                        const SelectionPolicy& policy,
                                        const SelectionWeights& weights,
                                        Rng& rng) {
  if (absl::Status s = ValidatePolicy(policy); !s.ok()) return s;
  const int k = policy.k;
  absl::StatusOr<double> lambda = PncfLambda(row, policy, weights.rs);
  if (!lambda.ok()) return lambda.status();
  if (absl::Status s = CheckWeights(row, weights); !s.ok()) return s;

  NeighbourSet set;
  set.target = row.target;
  if (*lambda <= 0.0) {
    absl::StatusOr<NeighbourSet> knn = SelectKnn(row, k);
    if (!knn.ok()) return knn.status();
    set = *std::move(knn);
  } else {
    const double sim_k = row.candidates[k - 1].sim;
    int32_t limit = row.size();
    if (policy.lambda_mode == LambdaMode::kAttack &&
        policy.beta != kUnboundedBeta) {
      limit = k * policy.beta;
    }
    // Sorted row: the sure members form a prefix, the band the next block.
    int32_t sure = 0;
    while (sure < limit && row.candidates[sure].sim > sim_k + *lambda) ++sure;
    int32_t band_end = sure;
    while (band_end < limit && row.candidates[band_end].sim >= sim_k - *lambda)
      ++band_end;

    for (int32_t rank = 0; rank < sure; ++rank) {
      set.members.push_back(MakeNeighbour(row, rank, k));
    }
    const int needed = k - sure;
    if (band_end - sure >= needed) {
      for (int32_t rank : DrawRanks(weights, sure, band_end, needed, rng)) {
        set.members.push_back(MakeNeighbour(row, rank, k));
      }
    } else {
      set.band_fallback = true;
      for (int32_t rank = sure; rank < sure + needed; ++rank) {
        set.members.push_back(MakeNeighbour(row, rank, k));
      }
    }
    SortByRank(set);
  }

  const double scale = policy.pncf_laplace_scale.value_or(
      2.0 * weights.rs.rs / policy.epsilon);
  if (scale > 0.0) {
    for (Neighbour& member : set.members) {
      member.sim = std::max(0.0, member.sim + rng.Laplace(scale));
    }
  }
  return set;
}

absl::StatusOr<NeighbourSet> SelectNeighbours(const SimilarityRow& row,
                                              const SelectionPolicy& policy,
                                              const SelectionWeights& weights,
                                              Rng& rng) {
  switch (policy.method) {
    case Method::kKnn:
      return SelectKnn(row, policy.k);
    case Method::kNpns:
      if (absl::Status s = ValidatePolicy(policy); !s.ok()) return s;
      return SelectNpns(row, policy.k, policy.beta, weights, rng);
    case Method::kPncf:
      return SelectPncf(row, policy, weights, rng);
    case Method::kPpns:
      return SelectPpns(row, policy, weights, rng);
  }
  return absl::InvalidArgumentError("unknown method");
}

}  // namespace ppns
