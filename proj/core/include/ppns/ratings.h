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

#ifndef PPNS_RATINGS_H_
#define PPNS_RATINGS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace ppns {

// Orientation of a rating matrix. Item-based CF runs the user-based
// machinery on the transpose, so "users" below always means rows.
enum class Axis { kUserBased, kItemBased };

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 5;

// A rating expressed with external (file) identifiers.
struct RatingTriple {
  int64_t user = 0;
  int64_t item = 0;
  int rating = 0;
};

// One stored rating, indexed by the dense id of the other axis.
struct Entry {
  int32_t index = 0;
  int32_t rating = 0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

// A cell masked out of every computation that reads the matrix through it.
struct HeldOutCell {
  int32_t user = 0;
  int32_t item = 0;
};

struct UserProfile {
  int32_t user = 0;
  std::vector<int32_t> rated_items;
  double mean_rating = 0.0;  // 0 when the user has no ratings
  double l2_norm = 0.0;
};

// Immutable sparse user x item matrix of integer star ratings.
//
// External ids are remapped to dense 0-based indices in ascending id order;
// the mapping is kept so reports can be written with the original ids.
// Both a row-major and a column-major copy are stored, each sorted by the
// dense index of the other axis.
class RatingMatrix {
 public:
  RatingMatrix() = default;

  // Validates ratings (integral, 1..5) and rejects duplicate (user, item)
  // pairs.
  static absl::StatusOr<RatingMatrix> FromTriples(
      std::span<const RatingTriple> triples, Axis axis = Axis::kUserBased);

  int32_t num_users() const { return static_cast<int32_t>(user_ids_.size()); }
  int32_t num_items() const { return static_cast<int32_t>(item_ids_.size()); }
  int64_t num_ratings() const { return static_cast<int64_t>(by_user_.size()); }
  Axis axis() const { return axis_; }

  // Ratings of one user sorted by item index.
  std::span<const Entry> UserRatings(int32_t user) const;
  // Ratings of one item sorted by user index.
  std::span<const Entry> ItemRatings(int32_t item) const;

  std::optional<int> Rating(int32_t user, int32_t item) const;

  double UserSquaredNorm(int32_t user) const { return squared_norms_[user]; }
  double UserNorm(int32_t user) const;
  double UserRatingSum(int32_t user) const { return rating_sums_[user]; }
  double UserMean(int32_t user) const;
  double GlobalRatingSum() const { return global_sum_; }
  double GlobalMean() const;
  UserProfile Profile(int32_t user) const;

  int64_t UserExternalId(int32_t user) const { return user_ids_[user]; }
  int64_t ItemExternalId(int32_t item) const { return item_ids_[item]; }
  std::optional<int32_t> FindUser(int64_t external_id) const;
  std::optional<int32_t> FindItem(int64_t external_id) const;

  // Canonical triples ordered by (user index, item index).
  std::vector<RatingTriple> Triples() const;

  // Swaps the user and item axes and flips the orientation flag.
  RatingMatrix Transpose() const;

  friend bool operator==(const RatingMatrix& a, const RatingMatrix& b);

 private:
  Axis axis_ = Axis::kUserBased;
  std::vector<int64_t> user_ids_;
  std::vector<int64_t> item_ids_;
  std::vector<int64_t> user_offsets_{0};
  std::vector<Entry> by_user_;
  std::vector<int64_t> item_offsets_{0};
  std::vector<Entry> by_item_;
  std::vector<double> squared_norms_;
  std::vector<double> rating_sums_;
  double global_sum_ = 0.0;
};

// MovieLens `u.data`: four tab-separated integer fields per line,
// `user_id item_id rating timestamp`. Timestamps are discarded.
absl::StatusOr<RatingMatrix> ParseMovieLens(std::istream& in);
absl::StatusOr<RatingMatrix> ReadMovieLens(const std::string& path);

// CSV with header `user,item,rating`.
absl::StatusOr<RatingMatrix> ParseRatingsCsv(std::istream& in);
absl::StatusOr<RatingMatrix> ReadRatingsCsv(const std::string& path);

// Writes `user,item,rating` in canonical order with external ids.
void WriteRatingsCsv(const RatingMatrix& matrix, std::ostream& out);

enum class DatasetFormat { kMovieLens, kCsv };

absl::StatusOr<RatingMatrix> ReadDataset(const std::string& path,
                                         DatasetFormat format);

}  // namespace ppns

#endif  // PPNS_RATINGS_H_
