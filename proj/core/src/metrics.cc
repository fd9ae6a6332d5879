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

#include "ppns/metrics.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "ppns/wallenius.h"

namespace ppns {
namespace {

void EnumerateAllocations(int k, int beta, AllocationVector& prefix,
                          int remaining,
                          std::vector<AllocationVector>& out) {
  const int position = static_cast<int>(prefix.size());
  if (position == beta - 1) {
    prefix.push_back(remaining);
    if (IsFeasibleAllocation(prefix, k)) out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int f = 0; f <= std::min(remaining, k - 1); ++f) {
    prefix.push_back(f);
    EnumerateAllocations(k, beta, prefix, remaining - f, out);
    prefix.pop_back();
  }
}

}  // namespace

absl::StatusOr<AccuracyEstimate> AlphaExpected(
    const SimilarityRow& row, const AllocationVector& allocation,
    const SelectionWeights& weights) {
  int k = 0;
  for (int f : allocation) k += f;
  if (!IsFeasibleAllocation(allocation, k)) {
    return absl::InvalidArgumentError(
        absl::StrCat("infeasible allocation [", absl::StrJoin(allocation, ","),
                     "]"));
  }
  const int64_t needed = static_cast<int64_t>(k) * allocation.size();
  if (row.size() < needed) {
    return absl::InvalidArgumentError(
        absl::StrCat("allocation needs ", needed, " candidates, row has ",
                     row.size()));
  }
  if (weights.log_omega.size() != row.candidates.size()) {
    return absl::InvalidArgumentError("weights do not match the row");
  }

  AccuracyEstimate est;
  est.source = AlphaSource::kWalleniusMean;
  est.per_partition.assign(allocation.size(), 0.0);
  for (size_t p = 0; p < allocation.size(); ++p) {
    if (allocation[p] == 0) continue;
    const int32_t begin = static_cast<int32_t>(p) * k;
    const int32_t end = begin + k;
    const double max_log = *std::max_element(
        weights.log_omega.begin() + begin, weights.log_omega.begin() + end);
    Population pop;
    pop.draws = allocation[p];
    for (int32_t r = begin; r < end; ++r) {
      pop.categories.push_back(
          {1, std::exp(weights.log_omega[r] - max_log)});
    }
    absl::StatusOr<MeanVector> mean = WalleniusMean(pop);
    if (!mean.ok()) return mean.status();
    double alpha_p = 0.0;
    for (int32_t r = begin; r < end; ++r) {
      alpha_p += row.candidates[r].sim * mean->mu[r - begin];
    }
    est.per_partition[p] = alpha_p;
  }
  for (double a : est.per_partition) est.alpha += a;
  return est;
}

absl::StatusOr<OptimalityReport> VerifyAllocationOptimality(
    const SimilarityRow& row, int k, int beta,
    const SelectionWeights& weights) {
  if (k < 1 || k > kMaxOptimalityK || beta < 1 || beta > kMaxOptimalityBeta) {
    return absl::InvalidArgumentError(absl::StrCat(
        "enumeration limited to 1 <= k <= ", kMaxOptimalityK,
        " and 1 <= beta <= ", kMaxOptimalityBeta));
  }
  std::vector<AllocationVector> allocations;
  AllocationVector prefix;
  EnumerateAllocations(k, beta, prefix, k, allocations);

  OptimalityReport report;
  report.k = k;
  report.beta = beta;
  report.best.alpha = -1.0;
  for (const AllocationVector& f : allocations) {
    absl::StatusOr<AccuracyEstimate> est = AlphaExpected(row, f, weights);
    if (!est.ok()) return est.status();
    report.scores.push_back({f, est->alpha});
    if (est->alpha > report.best.alpha) report.best = report.scores.back();
  }
  const AllocationVector ppns = PpnsAllocation(k, beta);
  const double tolerance = 1e-12 * std::max(1.0, std::fabs(report.best.alpha));
  for (const AllocationScore& s : report.scores) {
    if (s.allocation == ppns) report.ppns_alpha = s.alpha;
  }
  report.ppns_optimal = report.ppns_alpha >= report.best.alpha - tolerance;
  for (const AllocationScore& s : report.scores) {
    if (s.allocation != ppns && s.alpha >= report.best.alpha - tolerance) {
      ++report.ties;
    }
  }
  if (report.ppns_optimal) report.best = {ppns, report.ppns_alpha};
  return report;
}

void WriteOptimalityCsv(const OptimalityReport& report, std::ostream& out,
                        bool header) {
  if (header) out << "k,beta,allocation,alpha\n";
  for (const AllocationScore& s : report.scores) {
    out << absl::StrFormat("%d,%d,%s,%.12g\n", report.k, report.beta,
                           absl::StrJoin(s.allocation, ";"), s.alpha);
  }
}

absl::StatusOr<AccuracyEstimate> AlphaEmpirical(const SelectionFn& select,
                                                const SimilarityRow& row,
                                                int trials, uint64_t seed) {
  if (trials < 1) {
    return absl::InvalidArgumentError("need at least one trial");
  }
  AccuracyEstimate est;
  est.source = AlphaSource::kEmpirical;
  // Welford running moments.
  double mean = 0.0;
  double m2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(DeriveSeed(seed, {static_cast<uint64_t>(t)}));
    absl::StatusOr<NeighbourSet> set = select(rng);
    if (!set.ok()) return set.status();
    double total = 0.0;
    for (const Neighbour& n : set->members) {
      const double sim = row.candidates[n.rank].sim;
      total += sim;
      if (static_cast<size_t>(n.partition) >= est.per_partition.size()) {
        est.per_partition.resize(n.partition + 1, 0.0);
      }
      est.per_partition[n.partition] += sim;
    }
    const double delta = total - mean;
    mean += delta / (t + 1);
    m2 += delta * (total - mean);
  }
  est.alpha = mean;
  for (double& p : est.per_partition) p /= trials;
  if (trials > 1) {
    const double var = m2 / (trials - 1);
    est.standard_error = std::sqrt(var / trials);
  }
  return est;
}

}  // namespace ppns
