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

#include <algorithm>
#include <numeric>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "ppns/predict.h"
#include "ppns/random.h"
#include "ppns/ratings.h"
#include "ppns/selection.h"
#include "ppns/similarity.h"
#include "test_util.h"

namespace ppns {
namespace {

using ::ppns::testing::MustMatrix;

NeighbourSet Neighbours(int32_t target,
                        std::vector<std::pair<int32_t, double>> members) {
  NeighbourSet set;
  set.target = target;
  int32_t rank = 0;
  for (const auto& [user, sim] : members) {
    set.members.push_back({user, sim, rank++, 0});
  }
  return set;
}

SelectionPolicy Policy(Method method, int k, int beta = 1) {
  SelectionPolicy p;
  p.method = method;
  p.k = k;
  p.beta = beta;
  p.seed = 5;
  return p;
}

// Users 1..3 rate item 1; user 1 (the target) also rates item 2.
RatingMatrix SmallMatrix() {
  return MustMatrix({{1, 1, 3}, {1, 2, 2}, {2, 1, 4}, {2, 3, 1},
                     {3, 1, 2}, {3, 3, 5}, {4, 3, 4}});
}

TEST(PredictRatingTest, ConstantRatersGiveThatRating) {
  RatingMatrix m = MustMatrix({{1, 1, 1}, {2, 2, 4}, {3, 2, 4}, {4, 2, 4}});
  auto p = PredictRating(m, Neighbours(0, {{1, 0.9}, {2, 0.2}, {3, 0.5}}), 1);
  EXPECT_FALSE(p.fallback);
  EXPECT_EQ(p.neighbours_used, 3);
  EXPECT_DOUBLE_EQ(p.value, 4.0);
}

TEST(PredictRatingTest, SingleRaterWeightCancels) {
  RatingMatrix m = MustMatrix({{1, 1, 1}, {2, 2, 5}});
  auto p = PredictRating(m, Neighbours(0, {{1, 0.3}}), 1);
  EXPECT_DOUBLE_EQ(p.value, 5.0);
}

TEST(PredictRatingTest, WeightedAverage) {
  RatingMatrix m = MustMatrix({{1, 1, 1}, {2, 2, 4}, {3, 2, 2}});
  auto p = PredictRating(m, Neighbours(0, {{1, 0.5}, {2, 0.25}}), 1);
  EXPECT_NEAR(p.value, 10.0 / 3.0, 1e-15);
}

TEST(PredictRatingTest, NonRatersAreIgnored) {
  RatingMatrix m = SmallMatrix();
  // User 3 (dense index 3) never rated item 1 (dense index 0).
  auto p = PredictRating(m, Neighbours(0, {{1, 0.5}, {3, 0.9}}), 0);
  EXPECT_EQ(p.neighbours_used, 1);
  EXPECT_DOUBLE_EQ(p.value, 4.0);
}

TEST(PredictRatingTest, FallsBackToMaskedTargetMean) {
  RatingMatrix m = SmallMatrix();
  // Nobody else rated item 2 (dense 1); hold the target's own cell out.
  auto p = PredictRating(m, Neighbours(0, {{1, 0.5}, {2, 0.5}}), 1,
                         HeldOutCell{0, 1});
  EXPECT_TRUE(p.fallback);
  EXPECT_DOUBLE_EQ(p.value, 3.0);
}

TEST(PredictRatingTest, ZeroWeightFallsBack) {
  RatingMatrix m = SmallMatrix();
  auto p = PredictRating(m, Neighbours(0, {{1, 0.0}}), 0);
  EXPECT_TRUE(p.fallback);
  EXPECT_DOUBLE_EQ(p.value, 2.5);
}

TEST(PredictRatingTest, GlobalMeanWhenTargetHasNothingElse) {
  RatingMatrix m = MustMatrix({{1, 1, 5}, {2, 2, 1}, {3, 2, 3}});
  auto p = PredictRating(m, Neighbours(0, {{1, 0.5}}), 0, HeldOutCell{0, 0});
  EXPECT_TRUE(p.fallback);
  EXPECT_DOUBLE_EQ(p.value, 2.0);  // mean of the remaining ratings {1, 3}
}

TEST(PredictRatingTest, BoundedByContributingRatings) {
  Rng rng(10);
  RatingMatrix m = testing::RandomMatrix(30, 20, 0.4, 6);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::pair<int32_t, double>> members;
    for (int32_t u = 1; u < m.num_users(); ++u) {
      if (rng.Uniform() < 0.3) members.push_back({u, rng.Uniform()});
    }
    const auto item = static_cast<int32_t>(rng.UniformIndex(m.num_items()));
    auto p = PredictRating(m, Neighbours(0, members), item);
    if (p.fallback) continue;
    int lo = kMaxRating, hi = kMinRating;
    for (const auto& [u, sim] : members) {
      if (auto r = m.Rating(u, item)) {
        lo = std::min(lo, *r);
        hi = std::max(hi, *r);
      }
    }
    EXPECT_GE(p.value, lo - 1e-12);
    EXPECT_LE(p.value, hi + 1e-12);
  }
}

TEST(EvaluateMaeTest, IdenticalUsersGiveZero) {
  std::vector<RatingTriple> triples;
  for (int u = 1; u <= 5; ++u) {
    for (int i = 1; i <= 4; ++i) triples.push_back({u, i, i});
  }
  RatingMatrix m = MustMatrix(triples);
  std::vector<int32_t> targets = {0, 1, 2, 3, 4};
  auto report = EvaluateMae(m, Policy(Method::kKnn, 2), targets);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_EQ(report->mae, 0.0);
  EXPECT_EQ(report->n_predictions, 20);
  EXPECT_EQ(report->n_fallback, 0);
}

TEST(EvaluateMaeTest, ConstantPredictionAgainstExtremes) {
  RatingMatrix m = MustMatrix({{1, 1, 1}, {1, 2, 5}, {2, 1, 3}, {2, 2, 3},
                               {2, 3, 3}, {3, 1, 3}, {3, 2, 3}, {3, 3, 3}});
  std::vector<int32_t> targets = {0};
  auto report = EvaluateMae(m, Policy(Method::kKnn, 1), targets);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_DOUBLE_EQ(report->mae, 2.0);
  EXPECT_EQ(report->n_predictions, 2);
  ASSERT_EQ(report->per_target.size(), 1u);
  EXPECT_DOUBLE_EQ(report->per_target[0].abs_error_sum, 4.0);
}

TEST(EvaluateMaeTest, MaeEqualsPerTargetAverage) {
  RatingMatrix m = testing::RandomMatrix(40, 30, 0.3, 14);
  std::vector<int32_t> targets = {3, 9, 27, 30};
  auto report = EvaluateMae(m, Policy(Method::kPpns, 3, 2), targets);
  ASSERT_TRUE(report.ok()) << report.status();
  double sum = 0.0;
  int64_t n = 0;
  for (const TargetBreakdown& t : report->per_target) {
    sum += t.abs_error_sum;
    n += t.n;
    EXPECT_EQ(t.n, m.UserRatings(t.target).size());
  }
  EXPECT_EQ(n, report->n_predictions);
  EXPECT_NEAR(report->mae, sum / n, 1e-9);
}

TEST(EvaluateMaeTest, InvariantToTargetOrderAndThreads) {
  RatingMatrix m = testing::RandomMatrix(50, 40, 0.25, 15);
  std::vector<int32_t> targets = {1, 8, 13, 21, 34, 40};
  std::vector<int32_t> reversed(targets.rbegin(), targets.rend());
  for (Method method :
       {Method::kKnn, Method::kNpns, Method::kPncf, Method::kPpns}) {
    const SelectionPolicy policy = Policy(method, 4, 2);
    auto a = EvaluateMae(m, policy, targets);
    EvaluationOptions threaded;
    threaded.threads = 3;
    auto b = EvaluateMae(m, policy, reversed, threaded);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_NEAR(a->mae, b->mae, 1e-12);
    EXPECT_EQ(a->n_predictions, b->n_predictions);
    auto c = EvaluateMae(m, policy, targets);
    EXPECT_EQ(a->mae, c->mae);
  }
}

TEST(EvaluateMaeTest, BatchMatchesSinglePolicy) {
  RatingMatrix m = testing::RandomMatrix(40, 30, 0.3, 16);
  std::vector<int32_t> targets = {0, 5, 10};
  std::vector<SelectionPolicy> policies = {
      Policy(Method::kKnn, 3), Policy(Method::kPpns, 3, 3),
      Policy(Method::kNpns, 2, 4), Policy(Method::kPncf, 3, 2)};
  auto batch = EvaluateMae(m, policies, targets);
  ASSERT_TRUE(batch.ok()) << batch.status();
  for (size_t i = 0; i < policies.size(); ++i) {
    auto single = EvaluateMae(m, policies[i], targets);
    ASSERT_TRUE(single.ok());
    EXPECT_EQ((*batch)[i].mae, single->mae);
  }
}

TEST(EvaluateMaeTest, PpnsBetaOneEqualsKnn) {
  RatingMatrix m = testing::RandomMatrix(40, 30, 0.3, 17);
  std::vector<int32_t> targets = {2, 4, 6, 8};
  auto knn = EvaluateMae(m, Policy(Method::kKnn, 5), targets);
  auto ppns = EvaluateMae(m, Policy(Method::kPpns, 5, 1), targets);
  ASSERT_TRUE(knn.ok() && ppns.ok());
  EXPECT_EQ(knn->mae, ppns->mae);
}

TEST(EvaluateMaeTest, Errors) {
  RatingMatrix m = testing::RandomMatrix(10, 10, 0.5, 18);
  std::vector<int32_t> none;
  EXPECT_EQ(EvaluateMae(m, Policy(Method::kKnn, 2), none).status().code(),
            absl::StatusCode::kInvalidArgument);
  std::vector<int32_t> bad = {99};
  EXPECT_FALSE(EvaluateMae(m, Policy(Method::kKnn, 2), bad).ok());
  EvaluationOptions pairwise;
  pairwise.sensitivity.scope = SensitivityScope::kPairwise;
  std::vector<int32_t> one = {0};
  EXPECT_FALSE(EvaluateMae(m, Policy(Method::kPpns, 2, 2), one, pairwise).ok());
  RatingMatrix empty;
  EXPECT_FALSE(EvaluateMae(empty, Policy(Method::kKnn, 1), none).ok());
}

TEST(EvaluateMaeTest, FixedAndGlobalSensitivity) {
  RatingMatrix m = testing::RandomMatrix(30, 25, 0.3, 19);
  std::vector<int32_t> targets = {1, 2};
  EvaluationOptions fixed;
  fixed.sensitivity.fixed_rs = 2.5;
  EvaluationOptions global;
  global.sensitivity.scope = SensitivityScope::kGlobal;
  EXPECT_TRUE(EvaluateMae(m, Policy(Method::kPpns, 3, 2), targets, fixed).ok());
  EXPECT_TRUE(
      EvaluateMae(m, Policy(Method::kPpns, 3, 2), targets, global).ok());
}

TEST(SampleTargetsTest, DistinctAndSeeded) {
  auto a = SampleTargets(943, 200, 1);
  auto b = SampleTargets(943, 200, 1);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 200u);
  std::sort(a.begin(), a.end());
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_GE(a.front(), 0);
  EXPECT_LT(a.back(), 943);
  EXPECT_NE(SampleTargets(943, 200, 2), b);
  EXPECT_EQ(SampleTargets(5, 10, 1).size(), 5u);
}

}  // namespace
}  // namespace ppns
