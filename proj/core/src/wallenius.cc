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

#include "ppns/wallenius.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace ppns {
namespace {

absl::Status ValidateItems(std::span<const WeightedItem> items, int k) {
  if (k < 0 || static_cast<size_t>(k) > items.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot draw ", k, " items without replacement from ", items.size()));
  }
  for (const WeightedItem& item : items) {
    if (!(item.weight > 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("weight of item ", item.id, " must be positive"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<MeanVector> WalleniusMean(const Population& population) {
  const auto& cats = population.categories;
  int64_t total = 0;
  double max_weight = 0.0;
  for (const Category& c : cats) {
    if (c.size <= 0) {
      return absl::InvalidArgumentError("category sizes must be positive");
    }
    if (std::isnan(c.weight) || c.weight < 0.0 || std::isinf(c.weight)) {
      return absl::InvalidArgumentError(
          "category weights must be finite and positive");
    }
    total += c.size;
    max_weight = std::max(max_weight, c.weight);
  }
  if (population.draws < 0 || population.draws > total) {
    return absl::InvalidArgumentError(
        absl::StrCat("draw count ", population.draws,
                     " outside [0, population size ", total, "]"));
  }

  MeanVector out;
  out.mu.assign(cats.size(), 0.0);
  if (population.draws == 0) {
    out.t = 1.0;
    return out;
  }
  if (population.draws == total) {
    for (size_t i = 0; i < cats.size(); ++i) {
      out.mu[i] = static_cast<double>(cats[i].size);
    }
    out.t = 0.0;
    return out;
  }

  // Rescale so the largest weight is 1; the solution is scale-free.
  std::vector<double> w(cats.size());
  for (size_t i = 0; i < cats.size(); ++i) {
    w[i] = std::max(cats[i].weight, kMinWalleniusWeight) /
           std::max(max_weight, kMinWalleniusWeight);
    w[i] = std::max(w[i], kMinWalleniusWeight);
  }
  const double target = static_cast<double>(population.draws);
  auto drawn = [&](double s) {
    double sum = 0.0;
    for (size_t i = 0; i < cats.size(); ++i) {
      sum += -static_cast<double>(cats[i].size) * std::expm1(-w[i] * s);
    }
    return sum;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (drawn(hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (drawn(mid) < target ? lo : hi) = mid;
  }
  // Pick whichever bracket end has the smaller residual.
  const double s =
      std::fabs(drawn(lo) - target) <= std::fabs(drawn(hi) - target) ? lo : hi;
  for (size_t i = 0; i < cats.size(); ++i) {
    out.mu[i] = -static_cast<double>(cats[i].size) * std::expm1(-w[i] * s);
  }
  // Back in the caller's weight units.
  out.t = std::exp(-s / std::max(max_weight, kMinWalleniusWeight));
  return out;
}

std::vector<size_t> SampleByLogWeight(std::span<const double> log_weights,
                                      int k, Rng& rng) {
  const size_t n = log_weights.size();
  std::vector<double> keys(n);
  for (size_t i = 0; i < n; ++i) {
    keys[i] = std::log(rng.Exponential()) - log_weights[i];
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](size_t a, size_t b) {
                      if (keys[a] != keys[b]) return keys[a] < keys[b];
                      return a < b;
                    });
  order.resize(k);
  return order;
}

absl::StatusOr<std::vector<int32_t>> WeightedSampleWithoutReplacement(
    std::span<const WeightedItem> items, int k, Rng& rng) {
  if (absl::Status s = ValidateItems(items, k); !s.ok()) return s;
  std::vector<double> log_weights(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    log_weights[i] = std::log(items[i].weight);
  }
  std::vector<int32_t> out;
  out.reserve(k);
  for (size_t pos : SampleByLogWeight(log_weights, k, rng)) {
    out.push_back(items[pos].id);
  }
  return out;
}

absl::StatusOr<std::vector<int32_t>> WeightedSampleWithoutReplacement(
    std::span<const WeightedItem> items, int k, uint64_t seed) {
  Rng rng(seed);
  return WeightedSampleWithoutReplacement(items, k, rng);
}

absl::StatusOr<std::vector<double>> ExactSubsetProbabilities(
    std::span<const WeightedItem> items, int k) {
  if (items.size() > kMaxExactItems) {
    return absl::InvalidArgumentError(
        absl::StrCat("exact enumeration supports at most ", kMaxExactItems,
                     " items, got ", items.size()));
  }
  if (absl::Status s = ValidateItems(items, k); !s.ok()) return s;
  const size_t n = items.size();
  const double total = std::accumulate(
      items.begin(), items.end(), 0.0,
      [](double acc, const WeightedItem& it) { return acc + it.weight; });

  // reach[S] = probability that the first |S| draws are exactly the set S,
  // summed over their orders. Processing masks in increasing numeric order
  // visits every subset after all of its predecessors.
  std::vector<double> reach(size_t{1} << n, 0.0);
  reach[0] = 1.0;
  for (uint32_t mask = 0; mask < reach.size(); ++mask) {
    if (reach[mask] == 0.0 || std::popcount(mask) >= k) continue;
    double drawn_weight = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) drawn_weight += items[i].weight;
    }
    const double remaining = total - drawn_weight;
    for (size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) continue;
      reach[mask | (1u << i)] += reach[mask] * items[i].weight / remaining;
    }
  }
  for (uint32_t mask = 0; mask < reach.size(); ++mask) {
    if (std::popcount(mask) != k) reach[mask] = 0.0;
  }
  return reach;
}

absl::StatusOr<std::vector<double>> ExactInclusionProbabilities(
    std::span<const WeightedItem> items, int k) {
  absl::StatusOr<std::vector<double>> subsets =
      ExactSubsetProbabilities(items, k);
  if (!subsets.ok()) return subsets.status();
  std::vector<double> inclusion(items.size(), 0.0);
  for (uint32_t mask = 0; mask < subsets->size(); ++mask) {
    const double p = (*subsets)[mask];
    if (p == 0.0) continue;
    for (size_t i = 0; i < items.size(); ++i) {
      if (mask & (1u << i)) inclusion[i] += p;
    }
  }
  return inclusion;
}

}  // namespace ppns
