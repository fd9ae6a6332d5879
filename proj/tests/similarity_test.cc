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
#include <cmath>
#include <sstream>
#include <vector>

#include "absl/status/status.h"
#include "gtest/gtest.h"
#include "ppns/random.h"
#include "ppns/ratings.h"
#include "ppns/similarity.h"
#include "test_util.h"

namespace ppns {
namespace {

using ::ppns::testing::MustMatrix;

// Users 1 and 2 rate items 1 and 2 with the given ratings.
RatingMatrix TwoUsers(int a1, int a2, int b1, int b2) {
  return MustMatrix({{1, 1, a1}, {1, 2, a2}, {2, 1, b1}, {2, 2, b2}});
}

TEST(CosineSimilarityTest, HandExample) {
  RatingMatrix m = MustMatrix({{1, 1, 4}, {1, 2, 3}, {2, 1, 4}});
  EXPECT_NEAR(CosineSimilarity(m, 0, 1), 0.8, 1e-15);
}

TEST(CosineSimilarityTest, IdenticalVectorsGiveOne) {
  RatingMatrix m = TwoUsers(2, 5, 2, 5);
  EXPECT_NEAR(CosineSimilarity(m, 0, 1), 1.0, 1e-15);
}

TEST(CosineSimilarityTest, DisjointSupportsGiveZero) {
  RatingMatrix m = MustMatrix({{1, 1, 4}, {1, 2, 3}, {2, 3, 5}});
  EXPECT_EQ(CosineSimilarity(m, 0, 1), 0.0);
}

TEST(CosineSimilarityTest, HeldOutCellLeavesNumeratorAndNorm) {
  RatingMatrix m = MustMatrix({{1, 1, 4}, {1, 2, 3}, {2, 1, 4}, {2, 2, 1}});
  // Masking (user 0, item 1) leaves only item 0: vectors (4) and (4, 1).
  const double expected = 16.0 / (4.0 * std::sqrt(17.0));
  EXPECT_NEAR(CosineSimilarity(m, 0, 1, HeldOutCell{0, 1}), expected, 1e-15);
}

TEST(CosineSimilarityTest, SymmetricAndBoundedOnRandomPairs) {
  RatingMatrix m = testing::RandomMatrix(120, 80, 0.15, 11);
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto i = static_cast<int32_t>(rng.UniformIndex(m.num_users()));
    const auto j = static_cast<int32_t>(rng.UniformIndex(m.num_users()));
    const double a = CosineSimilarity(m, i, j);
    const double b = CosineSimilarity(m, j, i);
    EXPECT_NEAR(a, b, 1e-12);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0 + 1e-12);
  }
}

TEST(SimilarityRowTest, TwoUsersGiveSingleton) {
  RatingMatrix m = TwoUsers(1, 2, 3, 4);
  SimilarityRow row = ComputeSimilarityRow(m, 0);
  ASSERT_EQ(row.size(), 1);
  EXPECT_EQ(row.candidates[0].user, 1);
}

TEST(SimilarityRowTest, TiesBrokenByAscendingUser) {
  std::vector<RatingTriple> triples;
  for (int u = 1; u <= 6; ++u) {
    triples.push_back({u, 1, 3});
    triples.push_back({u, 2, 4});
  }
  RatingMatrix m = MustMatrix(triples);
  SimilarityRow row = ComputeSimilarityRow(m, 2);
  ASSERT_EQ(row.size(), 5);
  const std::vector<int32_t> expected = {0, 1, 3, 4, 5};
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(row.candidates[i].user, expected[i]);
    EXPECT_NEAR(row.candidates[i].sim, 1.0, 1e-15);
  }
}

TEST(SimilarityRowTest, MatchesPairwiseAndIsSorted) {
  RatingMatrix m = testing::RandomMatrix(60, 50, 0.2, 5);
  for (int32_t target : {0, 17, 59}) {
    SimilarityRow row = ComputeSimilarityRow(m, target);
    EXPECT_EQ(row.target, target);
    ASSERT_EQ(row.size(), m.num_users() - 1);
    for (int i = 0; i < row.size(); ++i) {
      const Candidate& c = row.candidates[i];
      EXPECT_NE(c.user, target);
      EXPECT_NEAR(c.sim, CosineSimilarity(m, target, c.user), 1e-12);
      if (i > 0) {
        const Candidate& p = row.candidates[i - 1];
        EXPECT_TRUE(p.sim > c.sim || (p.sim == c.sim && p.user < c.user));
      }
    }
  }
}

TEST(SimilarityRowTest, HeldOutRowMatchesPairwise) {
  RatingMatrix m = testing::RandomMatrix(40, 30, 0.3, 9);
  const int32_t target = 4;
  const HeldOutCell cell{target, m.UserRatings(target)[0].index};
  SimilarityRow row = ComputeSimilarityRow(m, target, cell);
  for (const Candidate& c : row.candidates) {
    EXPECT_NEAR(c.sim, CosineSimilarity(m, target, c.user, cell), 1e-12);
  }
}

TEST(SimilarityRowTest, MovieLensTopOneMatchesBruteForce) {
  auto m = ReadMovieLens(PPNS_MOVIELENS_PATH);
  if (!m.ok()) GTEST_SKIP() << "MovieLens not available: " << m.status();
  const int32_t target = *m->FindUser(1);
  SimilarityRow row = ComputeSimilarityRow(*m, target);
  ASSERT_EQ(row.size(), 942);
  double best = -1.0;
  int32_t best_user = -1;
  for (int32_t u = 0; u < m->num_users(); ++u) {
    if (u == target) continue;
    const double s = CosineSimilarity(*m, target, u);
    if (s > best) {
      best = s;
      best_user = u;
    }
  }
  EXPECT_EQ(row.candidates[0].user, best_user);
  EXPECT_NEAR(row.candidates[0].sim, best, 1e-12);
}

TEST(SensitivityTest, HandExample) {
  auto rs = PairSensitivity(TwoUsers(4, 3, 5, 1), 0, 1);
  ASSERT_TRUE(rs.ok()) << rs.status();
  EXPECT_NEAR(rs->rs, 20.0 / 3.0, 1e-12);
  EXPECT_EQ(rs->scope, SensitivityScope::kPairwise);
}

TEST(SensitivityTest, IdenticalVectors) {
  auto rs = PairSensitivity(TwoUsers(4, 3, 4, 3), 0, 1);
  ASSERT_TRUE(rs.ok()) << rs.status();
  EXPECT_NEAR(rs->rs, 16.0 / 9.0, 1e-12);
}

TEST(SensitivityTest, PairwiseEqualsGlobalOnTwoUsers) {
  RatingMatrix m = TwoUsers(2, 5, 3, 1);
  auto pair = PairSensitivity(m, 0, 1);
  auto local = TargetSensitivity(m, 0);
  auto global = GlobalSensitivity(m);
  ASSERT_TRUE(pair.ok() && local.ok() && global.ok());
  EXPECT_DOUBLE_EQ(pair->rs, global->rs);
  EXPECT_DOUBLE_EQ(pair->rs, local->rs);
  EXPECT_EQ(global->scope, SensitivityScope::kGlobal);
}

TEST(SensitivityTest, ScopesAreNested) {
  RatingMatrix m = testing::RandomMatrix(25, 20, 0.35, 21);
  auto global = GlobalSensitivity(m);
  ASSERT_TRUE(global.ok()) << global.status();
  for (int32_t t = 0; t < m.num_users(); ++t) {
    auto local = TargetSensitivity(m, t);
    if (!local.ok()) continue;
    EXPECT_LE(local->rs, global->rs);
    for (int32_t j = 0; j < m.num_users(); ++j) {
      auto pair = PairSensitivity(m, t, j);
      if (pair.ok()) EXPECT_LE(pair->rs, local->rs);
    }
  }
}

TEST(SensitivityTest, SingleCoRatedItemIsSkipped) {
  RatingMatrix m = MustMatrix({{1, 1, 4}, {1, 2, 3}, {2, 1, 4}, {2, 3, 1}});
  EXPECT_EQ(PairSensitivity(m, 0, 1).status().code(),
            absl::StatusCode::kFailedPrecondition);
  auto global = GlobalSensitivity(m);
  ASSERT_FALSE(global.ok());
  EXPECT_NE(global.status().message().find("--rs"), std::string::npos);
}

TEST(SelectionWeightsTest, ClosedForms) {
  SimilarityRow row = testing::RowFromSims({1.0, 0.5, 0.0});
  const int k = 2;
  const SensitivityValue rs{1.5, SensitivityScope::kTargetLocal};
  auto w = ComputeSelectionWeights(row, 4 * k * rs.rs, k, rs);
  ASSERT_TRUE(w.ok()) << w.status();
  EXPECT_NEAR(w->omega[0], std::exp(1.0), 1e-12);
  EXPECT_NEAR(w->omega[1], std::exp(0.5), 1e-12);
  EXPECT_EQ(w->omega[2], 1.0);
  for (size_t i = 0; i < w->omega.size(); ++i) {
    EXPECT_NEAR(std::log(w->omega[i]), w->log_omega[i], 1e-12);
  }
}

TEST(SelectionWeightsTest, DoublingEpsilonSquaresWeights) {
  Rng rng(8);
  SimilarityRow row = testing::RowFromSims(testing::RandomDescendingSims(30, rng));
  const SensitivityValue rs{2.0, SensitivityScope::kGlobal};
  auto a = ComputeSelectionWeights(row, 0.7, 5, rs);
  auto b = ComputeSelectionWeights(row, 1.4, 5, rs);
  ASSERT_TRUE(a.ok() && b.ok());
  for (int i = 0; i < row.size(); ++i) {
    EXPECT_NEAR(b->omega[i], a->omega[i] * a->omega[i], 1e-12);
    const double expected = std::exp(0.7 * row.candidates[i].sim / (20 * 2.0));
    EXPECT_NEAR(a->omega[i], expected, 1e-12);
    if (i > 0) EXPECT_GT(a->omega[i - 1], a->omega[i]);
  }
}

TEST(SelectionWeightsTest, RejectsNonPositiveParameters) {
  SimilarityRow row = testing::RowFromSims({0.5});
  const SensitivityValue rs{1.0, SensitivityScope::kGlobal};
  EXPECT_EQ(ComputeSelectionWeights(row, 0.0, 1, rs).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ComputeSelectionWeights(row, 1.0, 0, rs).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ComputeSelectionWeights(row, 1.0, 1, {-1.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(SimilarityCsvTest, WritesExternalIds) {
  RatingMatrix m = MustMatrix({{7, 1, 4}, {7, 2, 3}, {9, 1, 4}});
  std::vector<SimilarityRow> rows = {ComputeSimilarityRow(m, 0)};
  std::ostringstream out;
  WriteSimilarityRowsCsv(m, rows, out);
  EXPECT_EQ(out.str(), "target,candidate,sim\n7,9,0.8\n");
}

}  // namespace
}  // namespace ppns
