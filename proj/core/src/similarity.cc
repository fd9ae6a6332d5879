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

#include "ppns/similarity.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace ppns {
namespace {

bool IsHeldOut(const std::optional<HeldOutCell>& held_out, int32_t user,
               int32_t item) {
  return held_out && held_out->user == user && held_out->item == item;
}

// Squared norm of a user's profile with the held-out cell removed.
double MaskedSquaredNorm(const RatingMatrix& matrix, int32_t user,
                         const std::optional<HeldOutCell>& held_out) {
  double sq = matrix.UserSquaredNorm(user);
  if (held_out && held_out->user == user) {
    if (auto r = matrix.Rating(user, held_out->item)) sq -= *r * *r;
  }
  return sq;
}

double ClampUnit(double x) { return std::clamp(x, 0.0, 1.0); }

struct PairTerms {
  double max_term = 0.0;
  int co_rated = 0;
};

// Folds one co-rated item into the running maximum for a pair.
void AccumulateTerms(double r_i, double r_j, double sq_i, double sq_j,
                     PairTerms& acc) {
  ++acc.co_rated;
  const double norm_i = std::sqrt(sq_i);
  const double norm_j = std::sqrt(sq_j);
  const double primed_i = std::sqrt(std::max(0.0, sq_i - r_i * r_i));
  const double primed_j = std::sqrt(std::max(0.0, sq_j - r_j * r_j));
  if (primed_i <= 0.0 || primed_j <= 0.0) return;
  const double product = r_i * r_j;
  const double full = norm_i * norm_j;
  const double primed = primed_i * primed_j;
  const double term1 = product / primed;
  const double term2 = product * (full - primed) / (full * primed);
  acc.max_term = std::max({acc.max_term, term1, term2});
}

absl::Status NoQualifyingPair(absl::string_view scope) {
  return absl::FailedPreconditionError(absl::StrCat(
      "no user pair with at least two co-rated items in ", scope,
      " scope; the sensitivity cannot be derived from the data, supply a "
      "fixed value with --rs"));
}

}  // namespace

double CosineSimilarity(const RatingMatrix& matrix, int32_t i, int32_t j,
                        std::optional<HeldOutCell> held_out) {
  const double sq_i = MaskedSquaredNorm(matrix, i, held_out);
  const double sq_j = MaskedSquaredNorm(matrix, j, held_out);
  if (sq_i <= 0.0 || sq_j <= 0.0) return 0.0;
  const auto a = matrix.UserRatings(i);
  const auto b = matrix.UserRatings(j);
  double dot = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->index < ib->index) {
      ++ia;
    } else if (ib->index < ia->index) {
      ++ib;
    } else {
      if (!IsHeldOut(held_out, i, ia->index) &&
          !IsHeldOut(held_out, j, ib->index)) {
        dot += static_cast<double>(ia->rating) * ib->rating;
      }
      ++ia;
      ++ib;
    }
  }
  return ClampUnit(dot / (std::sqrt(sq_i) * std::sqrt(sq_j)));
}

SimilarityRow ComputeSimilarityRow(const RatingMatrix& matrix, int32_t target,
                                   std::optional<HeldOutCell> held_out) {
  const int32_t n = matrix.num_users();
  std::vector<double> dot(n, 0.0);
  for (const Entry& own : matrix.UserRatings(target)) {
    if (IsHeldOut(held_out, target, own.index)) continue;
    for (const Entry& other : matrix.ItemRatings(own.index)) {
      if (other.index == target || IsHeldOut(held_out, other.index, own.index))
        continue;
      dot[other.index] += static_cast<double>(own.rating) * other.rating;
    }
  }

  SimilarityRow row;
  row.target = target;
  row.candidates.reserve(n > 0 ? n - 1 : 0);
  const double norm_target =
      std::sqrt(MaskedSquaredNorm(matrix, target, held_out));
  for (int32_t u = 0; u < n; ++u) {
    if (u == target) continue;
    const double norm_u = std::sqrt(MaskedSquaredNorm(matrix, u, held_out));
    double sim = 0.0;
    if (norm_target > 0.0 && norm_u > 0.0) {
      sim = ClampUnit(dot[u] / (norm_target * norm_u));
    }
    row.candidates.push_back({u, sim});
  }
  std::sort(row.candidates.begin(), row.candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.sim != b.sim) return a.sim > b.sim;
              return a.user < b.user;
            });
  return row;
}

absl::StatusOr<SensitivityValue> PairSensitivity(
    const RatingMatrix& matrix, int32_t i, int32_t j,
    std::optional<HeldOutCell> held_out) {
  const double sq_i = MaskedSquaredNorm(matrix, i, held_out);
  const double sq_j = MaskedSquaredNorm(matrix, j, held_out);
  const auto a = matrix.UserRatings(i);
  const auto b = matrix.UserRatings(j);
  PairTerms acc;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->index < ib->index) {
      ++ia;
    } else if (ib->index < ia->index) {
      ++ib;
    } else {
      if (!IsHeldOut(held_out, i, ia->index) &&
          !IsHeldOut(held_out, j, ib->index)) {
        AccumulateTerms(ia->rating, ib->rating, sq_i, sq_j, acc);
      }
      ++ia;
      ++ib;
    }
  }
  if (i == j || acc.co_rated < 2 || acc.max_term <= 0.0) {
    return NoQualifyingPair("pairwise");
  }
  return SensitivityValue{acc.max_term, SensitivityScope::kPairwise};
}

absl::StatusOr<SensitivityValue> TargetSensitivity(
    const RatingMatrix& matrix, int32_t target,
    std::optional<HeldOutCell> held_out) {
  const int32_t n = matrix.num_users();
  std::vector<PairTerms> acc(n);
  const double sq_target = MaskedSquaredNorm(matrix, target, held_out);
  for (const Entry& own : matrix.UserRatings(target)) {
    if (IsHeldOut(held_out, target, own.index)) continue;
    for (const Entry& other : matrix.ItemRatings(own.index)) {
      if (other.index == target || IsHeldOut(held_out, other.index, own.index))
        continue;
      AccumulateTerms(own.rating, other.rating, sq_target,
                      MaskedSquaredNorm(matrix, other.index, held_out),
                      acc[other.index]);
    }
  }
  double rs = 0.0;
  for (const PairTerms& p : acc) {
    if (p.co_rated >= 2) rs = std::max(rs, p.max_term);
  }
  if (rs <= 0.0) return NoQualifyingPair("target-local");
  return SensitivityValue{rs, SensitivityScope::kTargetLocal};
}

absl::StatusOr<SensitivityValue> GlobalSensitivity(const RatingMatrix& matrix) {
  double rs = 0.0;
  for (int32_t u = 0; u < matrix.num_users(); ++u) {
    absl::StatusOr<SensitivityValue> local = TargetSensitivity(matrix, u);
    if (local.ok()) rs = std::max(rs, local->rs);
  }
  if (rs <= 0.0) return NoQualifyingPair("global");
  return SensitivityValue{rs, SensitivityScope::kGlobal};
}

absl::StatusOr<SelectionWeights> ComputeSelectionWeights(
    const SimilarityRow& row, double epsilon, int k, SensitivityValue rs) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  if (!(rs.rs > 0.0) || !std::isfinite(rs.rs)) {
    return absl::InvalidArgumentError("sensitivity must be positive");
  }
  SelectionWeights w;
  w.epsilon = epsilon;
  w.k = k;
  w.rs = rs;
  const double scale = epsilon / (4.0 * k * rs.rs);
  w.omega.reserve(row.candidates.size());
  w.log_omega.reserve(row.candidates.size());
  for (const Candidate& c : row.candidates) {
    const double log_w = scale * c.sim;
    w.log_omega.push_back(log_w);
    w.omega.push_back(std::exp(log_w));
  }
  return w;
}

void WriteSimilarityRowsCsv(const RatingMatrix& matrix,
                            std::span<const SimilarityRow> rows,
                            std::ostream& out) {
  out << "target,candidate,sim\n";
  for (const SimilarityRow& row : rows) {
    const int64_t target = matrix.UserExternalId(row.target);
    for (const Candidate& c : row.candidates) {
      out << absl::StrFormat("%d,%d,%.12g\n", target,
                             matrix.UserExternalId(c.user), c.sim);
    }
  }
}

}  // namespace ppns
