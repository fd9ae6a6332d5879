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

#include <cmath>
#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "ppns/metrics.h"
#include "ppns/random.h"
#include "ppns/ratings.h"
#include "ppns/selection.h"
#include "ppns/similarity.h"
#include "ppns/wallenius.h"

namespace ppns {
namespace {

// MovieLens-shaped random matrix: 943 x 1682 at about 6% density.
const RatingMatrix& Matrix() {
  static const RatingMatrix* m = [] {
    Rng rng(1);
    std::vector<RatingTriple> triples;
    for (int u = 1; u <= 943; ++u) {
      for (int i = 1; i <= 1682; ++i) {
        if (rng.Uniform() < 0.063) {
          triples.push_back({u, i, 1 + static_cast<int>(rng.UniformIndex(5))});
        }
      }
    }
    return new RatingMatrix(*RatingMatrix::FromTriples(triples));
  }();
  return *m;
}

void BM_SimilarityRow(benchmark::State& state) {
  const RatingMatrix& m = Matrix();
  int32_t target = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ComputeSimilarityRow(m, target));
    target = (target + 1) % m.num_users();
  }
}
BENCHMARK(BM_SimilarityRow);

void BM_TargetSensitivity(benchmark::State& state) {
  const RatingMatrix& m = Matrix();
  int32_t target = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(TargetSensitivity(m, target));
    target = (target + 1) % m.num_users();
  }
}
BENCHMARK(BM_TargetSensitivity);

void BM_WeightedSample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<WeightedItem> items;
  Rng init(2);
  for (int i = 0; i < n; ++i) items.push_back({i, 0.5 + init.Uniform()});
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(WeightedSampleWithoutReplacement(items, n / 4, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_WeightedSample)->Arg(100)->Arg(1000);

void BM_WalleniusMean(benchmark::State& state) {
  Population p;
  Rng rng(4);
  for (int i = 0; i < state.range(0); ++i) {
    p.categories.push_back({1, std::exp(rng.Uniform())});
  }
  p.draws = state.range(0) / 2;
  for (auto _ : state) benchmark::DoNotOptimize(WalleniusMean(p));
}
BENCHMARK(BM_WalleniusMean)->Arg(10)->Arg(100);

void BM_SelectPpns(benchmark::State& state) {
  const RatingMatrix& m = Matrix();
  const SimilarityRow row = ComputeSimilarityRow(m, 0);
  SelectionPolicy policy;
  policy.k = 100;
  policy.beta = static_cast<int>(state.range(0));
  const SelectionWeights w = *ComputeSelectionWeights(
      row, 1.0, policy.k, {1.0, SensitivityScope::kTargetLocal});
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SelectPpns(row, policy, w, rng));
  }
}
BENCHMARK(BM_SelectPpns)->Arg(2)->Arg(4);

void BM_AlphaExpected(benchmark::State& state) {
  const RatingMatrix& m = Matrix();
  const SimilarityRow row = ComputeSimilarityRow(m, 0);
  const SelectionWeights w = *ComputeSelectionWeights(
      row, 1.0, 100, {1.0, SensitivityScope::kTargetLocal});
  const AllocationVector f = PpnsAllocation(100, 4);
  for (auto _ : state) benchmark::DoNotOptimize(AlphaExpected(row, f, w));
}
BENCHMARK(BM_AlphaExpected);

}  // namespace
}  // namespace ppns

BENCHMARK_MAIN();
