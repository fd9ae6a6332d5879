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
#include <set>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "ppns/attack.h"
#include "ppns/ratings.h"
#include "ppns/selection.h"
#include "ppns/similarity.h"
#include "test_util.h"

namespace ppns {
namespace {

using ::ppns::testing::SyntheticAttackMatrix;

AttackConfig Config(Method method, int beta, int m = 8, int trials = 50) {
  AttackConfig c;
  c.target = 0;
  c.m = m;
  c.k_fakes = 50;
  c.policy.method = method;
  c.policy.k = 50;
  c.policy.beta = beta;
  c.policy.epsilon = 1.0;
  c.seed = 123;
  c.trials = trials;
  return c;
}

TEST(ForgeProfilesTest, AppendsClonesOfKnownRatings) {
  RatingMatrix original = SyntheticAttackMatrix(1);
  const RatingMatrix copy = original;
  auto forged = ForgeProfiles(original, Config(Method::kKnn, 1));
  ASSERT_TRUE(forged.ok()) << forged.status();
  const RatingMatrix& m = forged->matrix;
  EXPECT_EQ(m.num_users(), 250);
  EXPECT_EQ(m.num_items(), original.num_items());
  EXPECT_EQ(m.num_ratings(), original.num_ratings() + 50 * 8);
  EXPECT_EQ(original, copy);
  ASSERT_EQ(forged->fakes.size(), 50u);
  ASSERT_EQ(forged->known_items.size(), 8u);
  EXPECT_EQ(forged->sensitive_items.size(), 8u);

  std::set<int64_t> real_ids;
  for (int32_t u = 0; u < original.num_users(); ++u) {
    real_ids.insert(original.UserExternalId(u));
    EXPECT_EQ(m.UserExternalId(u), original.UserExternalId(u));
  }
  for (int32_t f : forged->fakes) {
    EXPECT_FALSE(real_ids.count(m.UserExternalId(f)));
    ASSERT_EQ(m.UserRatings(f).size(), 8u);
    for (int32_t item : forged->known_items) {
      EXPECT_EQ(m.Rating(f, item), original.Rating(0, item));
    }
    for (int32_t item : forged->sensitive_items) {
      EXPECT_FALSE(m.Rating(f, item).has_value());
    }
    EXPECT_NEAR(CosineSimilarity(m, f, forged->fakes[0]), 1.0, 1e-12);
  }
}

TEST(ForgeProfilesTest, FullCloneWhenMEqualsProfile) {
  RatingMatrix original = SyntheticAttackMatrix(2);
  auto forged = ForgeProfiles(original, Config(Method::kKnn, 1, 16));
  ASSERT_TRUE(forged.ok());
  EXPECT_TRUE(forged->sensitive_items.empty());
  EXPECT_NEAR(CosineSimilarity(forged->matrix, 0, forged->fakes[0]), 1.0,
              1e-12);
}

TEST(ForgeProfilesTest, TargetIsNearestRealUserOfEveryFake) {
  RatingMatrix original = SyntheticAttackMatrix(3);
  auto forged = ForgeProfiles(original, Config(Method::kKnn, 1));
  ASSERT_TRUE(forged.ok());
  SimilarityRow row = ComputeSimilarityRow(forged->matrix, forged->fakes[0]);
  for (int i = 0; i < 49; ++i) {
    EXPECT_GE(row.candidates[i].user, original.num_users());
  }
  EXPECT_EQ(row.candidates[49].user, 0);
}

TEST(ForgeProfilesTest, Validation) {
  RatingMatrix original = SyntheticAttackMatrix(4);
  EXPECT_EQ(ForgeProfiles(original, Config(Method::kKnn, 1, 17)).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(ForgeProfiles(original, Config(Method::kKnn, 1, 0)).ok());
  EXPECT_FALSE(
      ForgeProfiles(original.Transpose(), Config(Method::kKnn, 1)).ok());
}

TEST(ForgeProfilesTest, LargerMRaisesTargetSimilarity) {
  RatingMatrix original = SyntheticAttackMatrix(5);
  double previous_sim = 0.0;
  int previous_rank = 1 << 30;
  for (int m : {2, 4, 8, 12, 16}) {
    auto forged = ForgeProfiles(original, Config(Method::kKnn, 1, m));
    ASSERT_TRUE(forged.ok());
    const double sim = CosineSimilarity(forged->matrix, forged->fakes[0], 0);
    EXPECT_GE(sim, previous_sim - 1e-12) << "m " << m;
    previous_sim = sim;
    SimilarityRow row = ComputeSimilarityRow(forged->matrix, forged->fakes[0]);
    int rank = 0;
    while (row.candidates[rank].user != 0) ++rank;
    EXPECT_LE(rank, previous_rank) << "m " << m;
    previous_rank = rank;
  }
}

TEST(RunAttackTest, KnnDisclosesEverything) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    RatingMatrix original = SyntheticAttackMatrix(seed);
    auto report = RunAttack(original, Config(Method::kKnn, 1, 8, 10));
    ASSERT_TRUE(report.ok()) << report.status();
    EXPECT_EQ(report->sole_real_neighbour, 1.0);
    EXPECT_EQ(report->target_in_neighbours, 1.0);
    EXPECT_EQ(report->attack_mae, 0.0);
    EXPECT_EQ(report->disclosure_rate, 1.0);
    EXPECT_EQ(report->n_sensitive, 8);
  }
}

TEST(RunAttackTest, PpnsBetaOneMatchesKnnExposure) {
  RatingMatrix original = SyntheticAttackMatrix(6);
  auto ppns = RunAttack(original, Config(Method::kPpns, 1, 8, 10));
  auto knn = RunAttack(original, Config(Method::kKnn, 1, 8, 10));
  ASSERT_TRUE(ppns.ok() && knn.ok());
  EXPECT_EQ(ppns->sole_real_neighbour, knn->sole_real_neighbour);
  EXPECT_EQ(ppns->attack_mae, knn->attack_mae);
}

TEST(RunAttackTest, PpnsBetaTwoAlwaysAddsAnOutsider) {
  RatingMatrix original = SyntheticAttackMatrix(7);
  auto report = RunAttack(original, Config(Method::kPpns, 2));
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_LT(report->sole_real_neighbour, 1.0);
  int positive = 0;
  for (const TrialOutcome& t : report->per_trial) {
    EXPECT_FALSE(t.sole_real_neighbour);
    positive += t.attack_mae > 0.0;
  }
  EXPECT_GE(positive, 40);
}

TEST(RunAttackTest, Deterministic) {
  RatingMatrix original = SyntheticAttackMatrix(8);
  for (Method method : {Method::kNpns, Method::kPncf, Method::kPpns}) {
    auto a = RunAttack(original, Config(method, 3, 8, 5));
    auto b = RunAttack(original, Config(method, 3, 8, 5));
    ASSERT_TRUE(a.ok() && b.ok()) << a.status();
    EXPECT_EQ(a->attack_mae, b->attack_mae);
    for (size_t t = 0; t < a->per_trial.size(); ++t) {
      EXPECT_EQ(a->per_trial[t].observer, b->per_trial[t].observer);
    }
  }
}

TEST(RunAttackTest, FrozenSensitivityOption) {
  RatingMatrix original = SyntheticAttackMatrix(9);
  AttackConfig config = Config(Method::kPpns, 2, 8, 5);
  config.recompute_rs = false;
  EXPECT_TRUE(RunAttack(original, config).ok());
  config.fixed_rs = 3.0;
  EXPECT_TRUE(RunAttack(original, config).ok());
}

TEST(RunAttackTest, FractionsAreProbabilities) {
  RatingMatrix original = SyntheticAttackMatrix(10);
  for (Method method :
       {Method::kKnn, Method::kNpns, Method::kPncf, Method::kPpns}) {
    auto report = RunAttack(original, Config(method, 2, 4, 8));
    ASSERT_TRUE(report.ok());
    for (double f : {report->target_in_neighbours,
                     report->sole_real_neighbour, report->disclosure_rate}) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
    EXPECT_GE(report->attack_mae, 0.0);
    double sum = 0.0;
    for (const TrialOutcome& t : report->per_trial) sum += t.attack_mae;
    EXPECT_NEAR(report->attack_mae, sum / report->trials, 1e-12);
  }
}

}  // namespace
}  // namespace ppns
