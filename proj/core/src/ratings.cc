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

#include "ppns/ratings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"

namespace ppns {
namespace {

std::vector<int64_t> SortedUnique(std::vector<int64_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

int32_t DenseIndex(const std::vector<int64_t>& ids, int64_t id) {
  return static_cast<int32_t>(std::lower_bound(ids.begin(), ids.end(), id) -
                              ids.begin());
}

template <typename T>
bool ParseInteger(absl::string_view text, T& out) {
  while (!text.empty() && (text.front() == ' ')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ')) text.remove_suffix(1);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

absl::Status CheckRating(int rating, int64_t line_number) {
  if (rating < kMinRating || rating > kMaxRating) {
    return absl::InvalidArgumentError(
        absl::StrCat("line ", line_number, ": rating ", rating,
                     " outside [", kMinRating, ", ", kMaxRating, "]"));
  }
  return absl::OkStatus();
}

void StripLineEnding(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Splits one RFC-4180 record. Quoted fields may contain commas and doubled
// quotes; embedded newlines are not supported.
absl::StatusOr<std::vector<std::string>> SplitCsvRecord(std::string_view line,
                                                        int64_t line_number) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (!field.empty() || field_was_quoted) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_number, ": stray quote"));
      }
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    return absl::InvalidArgumentError(
        absl::StrCat("line ", line_number, ": unterminated quoted field"));
  }
  fields.push_back(std::move(field));
  return fields;
}

absl::StatusOr<std::ifstream> OpenForRead(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path));
  }
  return in;
}

}  // namespace

absl::StatusOr<RatingMatrix> RatingMatrix::FromTriples(
    std::span<const RatingTriple> triples, Axis axis) {
  RatingMatrix m;
  m.axis_ = axis;

  std::vector<int64_t> users, items;
  users.reserve(triples.size());
  items.reserve(triples.size());
  for (const RatingTriple& t : triples) {
    if (t.rating < kMinRating || t.rating > kMaxRating) {
      return absl::InvalidArgumentError(
          absl::StrCat("rating ", t.rating, " for (", t.user, ", ", t.item,
                       ") outside [", kMinRating, ", ", kMaxRating, "]"));
    }
    users.push_back(t.user);
    items.push_back(t.item);
  }
  m.user_ids_ = SortedUnique(std::move(users));
  m.item_ids_ = SortedUnique(std::move(items));

  struct Cell {
    int32_t user, item, rating;
  };
  std::vector<Cell> cells;
  cells.reserve(triples.size());
  for (const RatingTriple& t : triples) {
    cells.push_back({DenseIndex(m.user_ids_, t.user),
                     DenseIndex(m.item_ids_, t.item), t.rating});
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return std::pair(a.user, a.item) < std::pair(b.user, b.item);
  });
  for (size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].user == cells[i - 1].user &&
        cells[i].item == cells[i - 1].item) {
      return absl::InvalidArgumentError(absl::StrCat(
          "duplicate rating for user ", m.user_ids_[cells[i].user], ", item ",
          m.item_ids_[cells[i].item]));
    }
  }

  const int32_t n_users = m.num_users();
  const int32_t n_items = m.num_items();
  m.user_offsets_.assign(n_users + 1, 0);
  m.item_offsets_.assign(n_items + 1, 0);
  m.squared_norms_.assign(n_users, 0.0);
  m.rating_sums_.assign(n_users, 0.0);
  for (const Cell& c : cells) {
    ++m.user_offsets_[c.user + 1];
    ++m.item_offsets_[c.item + 1];
    m.squared_norms_[c.user] += static_cast<double>(c.rating) * c.rating;
    m.rating_sums_[c.user] += c.rating;
    m.global_sum_ += c.rating;
  }
  for (int32_t u = 0; u < n_users; ++u) {
    m.user_offsets_[u + 1] += m.user_offsets_[u];
  }
  for (int32_t i = 0; i < n_items; ++i) {
    m.item_offsets_[i + 1] += m.item_offsets_[i];
  }

  m.by_user_.resize(cells.size());
  m.by_item_.resize(cells.size());
  std::vector<int64_t> item_fill(m.item_offsets_.begin(),
                                 m.item_offsets_.end() - 1);
  // Cells are in (user, item) order, so both copies come out sorted.
  for (size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    m.by_user_[i] = {c.item, c.rating};
    m.by_item_[item_fill[c.item]++] = {c.user, c.rating};
  }
  return m;
}

std::span<const Entry> RatingMatrix::UserRatings(int32_t user) const {
  return std::span<const Entry>(by_user_).subspan(
      user_offsets_[user], user_offsets_[user + 1] - user_offsets_[user]);
}

std::span<const Entry> RatingMatrix::ItemRatings(int32_t item) const {
  return std::span<const Entry>(by_item_).subspan(
      item_offsets_[item], item_offsets_[item + 1] - item_offsets_[item]);
}

std::optional<int> RatingMatrix::Rating(int32_t user, int32_t item) const {
  const auto row = UserRatings(user);
  auto it = std::lower_bound(
      row.begin(), row.end(), item,
      [](const Entry& e, int32_t target) { return e.index < target; });
  if (it == row.end() || it->index != item) return std::nullopt;
  return it->rating;
}

double RatingMatrix::UserNorm(int32_t user) const {
  return std::sqrt(squared_norms_[user]);
}

double RatingMatrix::UserMean(int32_t user) const {
  const auto n = UserRatings(user).size();
  return n == 0 ? 0.0 : rating_sums_[user] / static_cast<double>(n);
}

double RatingMatrix::GlobalMean() const {
  return by_user_.empty() ? 0.0
                          : global_sum_ / static_cast<double>(by_user_.size());
}

UserProfile RatingMatrix::Profile(int32_t user) const {
  UserProfile p;
  p.user = user;
  for (const Entry& e : UserRatings(user)) p.rated_items.push_back(e.index);
  p.mean_rating = UserMean(user);
  p.l2_norm = UserNorm(user);
  return p;
}

std::optional<int32_t> RatingMatrix::FindUser(int64_t external_id) const {
  auto it = std::lower_bound(user_ids_.begin(), user_ids_.end(), external_id);
  if (it == user_ids_.end() || *it != external_id) return std::nullopt;
  return static_cast<int32_t>(it - user_ids_.begin());
}

std::optional<int32_t> RatingMatrix::FindItem(int64_t external_id) const {
  auto it = std::lower_bound(item_ids_.begin(), item_ids_.end(), external_id);
  if (it == item_ids_.end() || *it != external_id) return std::nullopt;
  return static_cast<int32_t>(it - item_ids_.begin());
}

std::vector<RatingTriple> RatingMatrix::Triples() const {
  std::vector<RatingTriple> out;
  out.reserve(by_user_.size());
  for (int32_t u = 0; u < num_users(); ++u) {
    for (const Entry& e : UserRatings(u)) {
      out.push_back({user_ids_[u], item_ids_[e.index], e.rating});
    }
  }
  return out;
}

RatingMatrix RatingMatrix::Transpose() const {
  RatingMatrix t;
  t.axis_ = axis_ == Axis::kUserBased ? Axis::kItemBased : Axis::kUserBased;
  t.user_ids_ = item_ids_;
  t.item_ids_ = user_ids_;
  t.user_offsets_ = item_offsets_;
  t.by_user_ = by_item_;
  t.item_offsets_ = user_offsets_;
  t.by_item_ = by_user_;
  t.squared_norms_.assign(t.user_ids_.size(), 0.0);
  t.rating_sums_.assign(t.user_ids_.size(), 0.0);
  for (int32_t u = 0; u < t.num_users(); ++u) {
    for (const Entry& e : t.UserRatings(u)) {
      t.squared_norms_[u] += static_cast<double>(e.rating) * e.rating;
      t.rating_sums_[u] += e.rating;
    }
  }
  t.global_sum_ = global_sum_;
  return t;
}

bool operator==(const RatingMatrix& a, const RatingMatrix& b) {
  return a.axis_ == b.axis_ && a.user_ids_ == b.user_ids_ &&
         a.item_ids_ == b.item_ids_ && a.user_offsets_ == b.user_offsets_ &&
         a.by_user_ == b.by_user_;
}

absl::StatusOr<RatingMatrix> ParseMovieLens(std::istream& in) {
  std::vector<RatingTriple> triples;
  std::string line;
  int64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    StripLineEnding(line);
    if (line.empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(line, '\t');
    RatingTriple t;
    int64_t timestamp = 0;
    if (fields.size() != 4 || !ParseInteger(fields[0], t.user) ||
        !ParseInteger(fields[1], t.item) ||
        !ParseInteger(fields[2], t.rating) ||
        !ParseInteger(fields[3], timestamp)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_number,
          ": expected `user_id<TAB>item_id<TAB>rating<TAB>timestamp`"));
    }
    if (absl::Status s = CheckRating(t.rating, line_number); !s.ok()) return s;
    triples.push_back(t);
  }
  return RatingMatrix::FromTriples(triples);
}

absl::StatusOr<RatingMatrix> ReadMovieLens(const std::string& path) {
  absl::StatusOr<std::ifstream> in = OpenForRead(path);
  if (!in.ok()) return in.status();
  return ParseMovieLens(*in);
}

absl::StatusOr<RatingMatrix> ParseRatingsCsv(std::istream& in) {
  std::string line;
  int64_t line_number = 0;
  bool have_header = false;
  std::vector<RatingTriple> triples;
  while (std::getline(in, line)) {
    ++line_number;
    StripLineEnding(line);
    if (!have_header) {
      if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
      auto header = SplitCsvRecord(line, line_number);
      if (!header.ok()) return header.status();
      if (*header != std::vector<std::string>{"user", "item", "rating"}) {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", line_number, ": expected header `user,item,rating`"));
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = SplitCsvRecord(line, line_number);
    if (!fields.ok()) return fields.status();
    RatingTriple t;
    if (fields->size() != 3 || !ParseInteger((*fields)[0], t.user) ||
        !ParseInteger((*fields)[1], t.item) ||
        !ParseInteger((*fields)[2], t.rating)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_number, ": expected three integer fields"));
    }
    if (absl::Status s = CheckRating(t.rating, line_number); !s.ok()) return s;
    triples.push_back(t);
  }
  if (!have_header) {
    return absl::InvalidArgumentError("missing header `user,item,rating`");
  }
  return RatingMatrix::FromTriples(triples);
}

absl::StatusOr<RatingMatrix> ReadRatingsCsv(const std::string& path) {
  absl::StatusOr<std::ifstream> in = OpenForRead(path);
  if (!in.ok()) return in.status();
  return ParseRatingsCsv(*in);
}

void WriteRatingsCsv(const RatingMatrix& matrix, std::ostream& out) {
  out << "user,item,rating\n";
  for (const RatingTriple& t : matrix.Triples()) {
    out << t.user << ',' << t.item << ',' << t.rating << '\n';
  }
}

absl::StatusOr<RatingMatrix> ReadDataset(const std::string& path,
                                         DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kMovieLens:
      return ReadMovieLens(path);
    case DatasetFormat::kCsv:
      return ReadRatingsCsv(path);
  }
  return absl::InvalidArgumentError("unknown dataset format");
}

}  // namespace ppns
