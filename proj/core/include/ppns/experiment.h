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

#ifndef PPNS_EXPERIMENT_H_
#define PPNS_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ppns/predict.h"
#include "ppns/ratings.h"
#include "ppns/selection.h"

namespace ppns {

enum class PlotAxis { kAuto, kBeta, kK, kEpsilon, kM };

struct ExperimentSpec {
  std::string dataset;
  DatasetFormat format = DatasetFormat::kMovieLens;
  Axis mode = Axis::kUserBased;

  std::vector<Method> methods;
  std::vector<int> ks;
  std::vector<double> epsilons;
  std::vector<int> betas;
  // Non-empty switches to the attack experiment.
  std::vector<int> attack_ms;

  // MAE runs: number of selection seeds. Attack runs: trials per target.
  int trials = 5;
  uint64_t seed = 1;
  std::string out_dir = ".";

  double rho = 0.5;
  std::optional<double> pncf_laplace_scale;
  LambdaMode lambda_mode = LambdaMode::kAttack;
  SensitivityOptions sensitivity;

  int targets = 200;        // evaluated rows (users, or items when item-based)
  int attack_targets = 20;  // attacked users
  PlotAxis plot_axis = PlotAxis::kAuto;
  int threads = 0;
};

// Grid sanity plus the partition bound beta <= floor(rows / (2k)).
absl::Status ValidateExperimentSpec(const ExperimentSpec& spec);
absl::Status ValidateExperimentGrid(const ExperimentSpec& spec,
                                    int32_t rows);

// One row of the MAE report: `method,k,epsilon,beta,seed,mae,n`.
struct MaeRow {
  Method method = Method::kKnn;
  int k = 0;
  double epsilon = 0.0;
  int beta = 0;
  int trial = 0;
  uint64_t seed = 0;
  double mae = 0.0;
  int64_t n = 0;
};

// One pooled row of the attack report:
// `method,k,epsilon,beta,m,seed,target_in_nbr,sole_real,attack_mae`.
struct AttackRow {
  Method method = Method::kKnn;
  int k = 0;
  double epsilon = 0.0;
  int beta = 0;
  int m = 0;
  uint64_t seed = 0;
  int64_t target = -1;  // external id; -1 for rows pooled over targets
  double target_in_nbr = 0.0;
  double sole_real = 0.0;
  double attack_mae = 0.0;
};

struct ExperimentResult {
  std::vector<MaeRow> mae_rows;
  std::vector<AttackRow> attack_rows;      // pooled
  std::vector<AttackRow> attack_by_target; // one per target
  std::vector<int64_t> targets;            // external ids, draw order
  std::vector<std::string> files;          // everything written
};

// Runs the grid described by spec against an already loaded matrix (already
// transposed for item-based runs) and writes the reports into
// spec.out_dir. Rows are ordered by the grid, never by completion.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentSpec& spec,
                                               const RatingMatrix& matrix);

// Loads spec.dataset, transposes it for item-based mode, then runs.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentSpec& spec);

struct PlotPoint {
  std::string curve;
  double x = 0.0;
  double y = 0.0;
};

// Writes one two-column `x y` file per curve, named <prefix>_<curve>.dat,
// keeping curves and points in first-seen order. Returns the paths.
absl::StatusOr<std::vector<std::string>> EmitPlotData(
    const std::vector<PlotPoint>& points, const std::string& out_dir,
    const std::string& prefix);

void WriteMaeCsv(const std::vector<MaeRow>& rows, std::ostream& out);
void WriteAttackCsv(const std::vector<AttackRow>& rows, std::ostream& out,
                    bool with_target);

// Maps a status to the tool's exit code: 0 ok, 2 validation, 3 I/O, 1 other.
int ExitCodeFor(const absl::Status& status);

}  // namespace ppns

#endif  // PPNS_EXPERIMENT_H_
