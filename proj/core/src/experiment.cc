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

#include "ppns/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ppns/attack.h"
#include "ppns/parallel.h"
#include "ppns/random.h"

namespace ppns {
namespace {

// Seed-derivation domains, so streams never collide across stages.
constexpr uint64_t kTargetStream = 1;
constexpr uint64_t kPolicyStream = 2;
constexpr uint64_t kAttackStream = 3;
constexpr uint64_t kAttackTargetStream = 4;

std::string FormatNumber(double x) { return absl::StrFormat("%.10g", x); }

absl::Status WriteFile(const std::string& path, const std::string& contents,
                       std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << contents;
  out.close();
  if (!out) return absl::UnavailableError(absl::StrCat("short write to ", path));
  written.push_back(path);
  return absl::OkStatus();
}

// Grid parameter shown on the x axis of the .dat files.
PlotAxis ResolvePlotAxis(const ExperimentSpec& spec) {
  if (spec.plot_axis != PlotAxis::kAuto) return spec.plot_axis;
  if (spec.betas.size() > 1) return PlotAxis::kBeta;
  if (spec.ks.size() > 1) return PlotAxis::kK;
  if (spec.epsilons.size() > 1) return PlotAxis::kEpsilon;
  if (spec.attack_ms.size() > 1) return PlotAxis::kM;
  return PlotAxis::kBeta;
}

struct GridKey {
  Method method;
  int k;
  double epsilon;
  int beta;
  int m;
};

double AxisValue(PlotAxis axis, const GridKey& key) {
  switch (axis) {
    case PlotAxis::kK:
      return key.k;
    case PlotAxis::kEpsilon:
      return key.epsilon;
    case PlotAxis::kM:
      return key.m;
    case PlotAxis::kBeta:
    case PlotAxis::kAuto:
      break;
  }
  return key.beta;
}

std::string CurveName(const ExperimentSpec& spec, PlotAxis axis,
                      const GridKey& key) {
  std::string name(MethodName(key.method));
  if (axis != PlotAxis::kK && spec.ks.size() > 1) {
    absl::StrAppend(&name, "_k", key.k);
  }
  if (axis != PlotAxis::kEpsilon && spec.epsilons.size() > 1) {
    absl::StrAppend(&name, "_eps", FormatNumber(key.epsilon));
  }
  if (axis != PlotAxis::kBeta && spec.betas.size() > 1) {
    absl::StrAppend(&name, "_beta", key.beta);
  }
  if (axis != PlotAxis::kM && spec.attack_ms.size() > 1) {
    absl::StrAppend(&name, "_m", key.m);
  }
  return name;
}

SelectionPolicy MakePolicy(const ExperimentSpec& spec, const GridKey& key,
                           uint64_t seed) {
  SelectionPolicy p;
  p.method = key.method;
  p.k = key.k;
  p.epsilon = key.epsilon;
  p.beta = key.beta;
  p.lambda_mode = spec.lambda_mode;
  p.rho = spec.rho;
  p.pncf_laplace_scale = spec.pncf_laplace_scale;
  p.seed = seed;
  return p;
}

std::vector<GridKey> PolicyGrid(const ExperimentSpec& spec, int m) {
  std::vector<GridKey> grid;
  for (Method method : spec.methods) {
    for (int k : spec.ks) {
      for (double eps : spec.epsilons) {
        for (int beta : spec.betas) grid.push_back({method, k, eps, beta, m});
      }
    }
  }
  return grid;
}

absl::StatusOr<ExperimentResult> RunMaeExperiment(const ExperimentSpec& spec,
                                                  const RatingMatrix& matrix) {
  ExperimentResult result;
  const std::vector<int32_t> targets = SampleTargets(
      matrix.num_users(), spec.targets, DeriveSeed(spec.seed, {kTargetStream}));
  for (int32_t t : targets) result.targets.push_back(matrix.UserExternalId(t));

  const std::vector<GridKey> grid = PolicyGrid(spec, 0);
  std::vector<SelectionPolicy> policies;
  for (const GridKey& key : grid) {
    for (int trial = 0; trial < spec.trials; ++trial) {
      policies.push_back(MakePolicy(
          spec, key,
          DeriveSeed(spec.seed,
                     {kPolicyStream, static_cast<uint64_t>(trial)})));
    }
  }
  EvaluationOptions options;
  options.sensitivity = spec.sensitivity;
  options.threads = spec.threads;
  absl::StatusOr<std::vector<EvaluationReport>> reports =
      EvaluateMae(matrix, policies, targets, options);
  if (!reports.ok()) return reports.status();

  const PlotAxis axis = ResolvePlotAxis(spec);
  std::vector<PlotPoint> points;
  size_t next = 0;
  for (const GridKey& key : grid) {
    double mean = 0.0;
    for (int trial = 0; trial < spec.trials; ++trial, ++next) {
      const EvaluationReport& r = (*reports)[next];
      result.mae_rows.push_back({key.method, key.k, key.epsilon, key.beta,
                                 trial, policies[next].seed, r.mae,
                                 r.n_predictions});
      mean += r.mae;
    }
    points.push_back(
        {CurveName(spec, axis, key), AxisValue(axis, key), mean / spec.trials});
  }

  std::ostringstream mae_csv;
  WriteMaeCsv(result.mae_rows, mae_csv);
  if (absl::Status s = WriteFile(
          (std::filesystem::path(spec.out_dir) / "mae.csv").string(),
          mae_csv.str(), result.files);
      !s.ok()) {
    return s;
  }

  std::ostringstream targets_csv;
  targets_csv << "index,target,seed\n";
  for (size_t i = 0; i < result.targets.size(); ++i) {
    targets_csv << i << ',' << result.targets[i] << ',' << spec.seed << '\n';
  }
  if (absl::Status s = WriteFile(
          (std::filesystem::path(spec.out_dir) / "targets.csv").string(),
          targets_csv.str(), result.files);
      !s.ok()) {
    return s;
  }

  absl::StatusOr<std::vector<std::string>> dat =
      EmitPlotData(points, spec.out_dir, "mae");
  if (!dat.ok()) return dat.status();
  result.files.insert(result.files.end(), dat->begin(), dat->end());
  return result;
}

absl::StatusOr<ExperimentResult> RunAttackExperiment(
    const ExperimentSpec& spec, const RatingMatrix& matrix) {
  ExperimentResult result;
  const int max_m = *std::max_element(spec.attack_ms.begin(),
                                      spec.attack_ms.end());
  // Targets need at least one sensitive item left after the largest m.
  std::vector<int32_t> eligible;
  for (int32_t u = 0; u < matrix.num_users(); ++u) {
    if (static_cast<int64_t>(matrix.UserRatings(u).size()) > max_m) {
      eligible.push_back(u);
    }
  }
  if (eligible.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("no user rated more than m = ", max_m, " items"));
  }
  std::vector<int32_t> targets;
  for (int32_t pos : SampleTargets(
           static_cast<int32_t>(eligible.size()), spec.attack_targets,
           DeriveSeed(spec.seed, {kAttackTargetStream}))) {
    targets.push_back(eligible[pos]);
  }
  for (int32_t t : targets) result.targets.push_back(matrix.UserExternalId(t));

  struct Cell {
    GridKey key;
    uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int m : spec.attack_ms) {
    for (const GridKey& key : PolicyGrid(spec, m)) cells.push_back({key, 0});
  }

  // slots[target_pos * cells.size() + cell]
  std::vector<AttackRow> slots(targets.size() * cells.size());
  std::vector<absl::Status> errors(targets.size());
  ParallelFor(targets.size(), spec.threads, [&](size_t pos) {
    const int32_t target = targets[pos];
    const int64_t external = matrix.UserExternalId(target);
    std::map<std::pair<int, int>, ForgedMatrix> forged;  // (m, k)
    for (size_t c = 0; c < cells.size(); ++c) {
      const GridKey& key = cells[c].key;
      AttackConfig config;
      config.target = target;
      config.m = key.m;
      config.k_fakes = key.k;
      config.trials = spec.trials;
      config.seed = DeriveSeed(spec.seed,
                               {kAttackStream, static_cast<uint64_t>(external),
                                static_cast<uint64_t>(key.m)});
      config.policy = MakePolicy(spec, key, config.seed);
      config.fixed_rs = spec.sensitivity.fixed_rs;
      auto it = forged.find({key.m, key.k});
      if (it == forged.end()) {
        absl::StatusOr<ForgedMatrix> f = ForgeProfiles(matrix, config);
        if (!f.ok()) {
          errors[pos] = f.status();
          return;
        }
        it = forged.emplace(std::pair(key.m, key.k), *std::move(f)).first;
      }
      absl::StatusOr<DisclosureReport> report =
          RunAttack(matrix, it->second, config);
      if (!report.ok()) {
        errors[pos] = report.status();
        return;
      }
      slots[pos * cells.size() + c] = {
          key.method, key.k, key.epsilon, key.beta, key.m, spec.seed,
          external, report->target_in_neighbours, report->sole_real_neighbour,
          report->attack_mae};
    }
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }

  const PlotAxis axis = ResolvePlotAxis(spec);
  std::vector<PlotPoint> points;
  for (size_t c = 0; c < cells.size(); ++c) {
    const GridKey& key = cells[c].key;
    AttackRow pooled{key.method, key.k, key.epsilon, key.beta, key.m,
                     spec.seed,  -1,    0.0,         0.0,      0.0};
    for (size_t pos = 0; pos < targets.size(); ++pos) {
      const AttackRow& row = slots[pos * cells.size() + c];
      pooled.target_in_nbr += row.target_in_nbr;
      pooled.sole_real += row.sole_real;
      pooled.attack_mae += row.attack_mae;
    }
    const double n = static_cast<double>(targets.size());
    pooled.target_in_nbr /= n;
    pooled.sole_real /= n;
    pooled.attack_mae /= n;
    result.attack_rows.push_back(pooled);
    points.push_back(
        {CurveName(spec, axis, key), AxisValue(axis, key), pooled.attack_mae});
  }
  for (size_t pos = 0; pos < targets.size(); ++pos) {
    for (size_t c = 0; c < cells.size(); ++c) {
      result.attack_by_target.push_back(slots[pos * cells.size() + c]);
    }
  }

  const std::filesystem::path dir(spec.out_dir);
  std::ostringstream pooled_csv, per_target_csv, targets_csv;
  WriteAttackCsv(result.attack_rows, pooled_csv, false);
  WriteAttackCsv(result.attack_by_target, per_target_csv, true);
  targets_csv << "index,target,seed\n";
  for (size_t i = 0; i < result.targets.size(); ++i) {
    targets_csv << i << ',' << result.targets[i] << ',' << spec.seed << '\n';
  }
  for (auto& [name, body] :
       {std::pair<std::string, std::string>{"attack.csv", pooled_csv.str()},
        {"attack_per_target.csv", per_target_csv.str()},
        {"attack_targets.csv", targets_csv.str()}}) {
    if (absl::Status s = WriteFile((dir / name).string(), body, result.files);
        !s.ok()) {
      return s;
    }
  }
  absl::StatusOr<std::vector<std::string>> dat =
      EmitPlotData(points, spec.out_dir, "attack");
  if (!dat.ok()) return dat.status();
  result.files.insert(result.files.end(), dat->begin(), dat->end());
  return result;
}

}  // namespace

absl::Status ValidateExperimentSpec(const ExperimentSpec& spec) {
  if (spec.methods.empty()) {
    return absl::InvalidArgumentError("no methods given");
  }
  if (spec.ks.empty() || spec.epsilons.empty() || spec.betas.empty()) {
    return absl::InvalidArgumentError("k, epsilon and beta grids are required");
  }
  for (int k : spec.ks) {
    if (k < 1) return absl::InvalidArgumentError("k values must be >= 1");
  }
  for (double eps : spec.epsilons) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      return absl::InvalidArgumentError("epsilon values must be positive");
    }
  }
  for (int beta : spec.betas) {
    if (beta < 1) return absl::InvalidArgumentError("beta values must be >= 1");
  }
  for (int m : spec.attack_ms) {
    if (m < 1) return absl::InvalidArgumentError("m values must be >= 1");
  }
  if (spec.trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (spec.targets < 1 || spec.attack_targets < 1) {
    return absl::InvalidArgumentError("target counts must be >= 1");
  }
  if (!(spec.rho > 0.0 && spec.rho < 1.0)) {
    return absl::InvalidArgumentError("rho must lie in (0, 1)");
  }
  if (spec.pncf_laplace_scale && !(*spec.pncf_laplace_scale >= 0.0)) {
    return absl::InvalidArgumentError("Laplace scale must be non-negative");
  }
  if (spec.sensitivity.scope == SensitivityScope::kPairwise &&
      !spec.sensitivity.fixed_rs) {
    return absl::InvalidArgumentError(
        "pairwise sensitivity is not available for experiments");
  }
  if (spec.sensitivity.fixed_rs && !(*spec.sensitivity.fixed_rs > 0.0)) {
    return absl::InvalidArgumentError("--rs must be positive");
  }
  if (!spec.attack_ms.empty() && spec.mode != Axis::kUserBased) {
    return absl::InvalidArgumentError(
        "the kNN attack is user-based; use --mode user");
  }
  return absl::OkStatus();
}

absl::Status ValidateExperimentGrid(const ExperimentSpec& spec,
                                    int32_t rows) {
  if (absl::Status s = ValidateExperimentSpec(spec); !s.ok()) return s;
  for (int k : spec.ks) {
    const int64_t bound = rows / (2 * static_cast<int64_t>(k));
    for (int beta : spec.betas) {
      if (beta > bound) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "beta = %d with k = %d exceeds floor(%d / (2k)) = %d", beta, k,
            rows, bound));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentSpec& spec,
                                               const RatingMatrix& matrix) {
  if (absl::Status s = ValidateExperimentGrid(spec, matrix.num_users());
      !s.ok()) {
    return s;
  }
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", spec.out_dir, ": ", ec.message()));
  }
  if (spec.attack_ms.empty()) return RunMaeExperiment(spec, matrix);
  return RunAttackExperiment(spec, matrix);
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentSpec& spec) {
  if (absl::Status s = ValidateExperimentSpec(spec); !s.ok()) return s;
  absl::StatusOr<RatingMatrix> matrix = ReadDataset(spec.dataset, spec.format);
  if (!matrix.ok()) return matrix.status();
  if (spec.mode == Axis::kItemBased) return RunExperiment(spec, matrix->Transpose());
  return RunExperiment(spec, *matrix);
}

absl::StatusOr<std::vector<std::string>> EmitPlotData(
    const std::vector<PlotPoint>& points, const std::string& out_dir,
    const std::string& prefix) {
  std::vector<std::string> order;
  std::map<std::string, std::string> bodies;
  for (const PlotPoint& p : points) {
    auto [it, inserted] = bodies.try_emplace(p.curve);
    if (inserted) order.push_back(p.curve);
    absl::StrAppend(&it->second, FormatNumber(p.x), " ", FormatNumber(p.y),
                    "\n");
  }
  std::vector<std::string> written;
  for (const std::string& curve : order) {
    const std::string path =
        (std::filesystem::path(out_dir) / absl::StrCat(prefix, "_", curve,
                                                       ".dat"))
            .string();
    if (absl::Status s = WriteFile(path, bodies[curve], written); !s.ok()) {
      return s;
    }
  }
  return written;
}

void WriteMaeCsv(const std::vector<MaeRow>& rows, std::ostream& out) {
  out << "method,k,epsilon,beta,seed,mae,n\n";
  for (const MaeRow& r : rows) {
    out << MethodName(r.method) << ',' << r.k << ','
        << FormatNumber(r.epsilon) << ',' << r.beta << ',' << r.seed << ','
        << FormatNumber(r.mae) << ',' << r.n << '\n';
  }
}

void WriteAttackCsv(const std::vector<AttackRow>& rows, std::ostream& out,
                    bool with_target) {
  if (with_target) out << "target,";
  out << "method,k,epsilon,beta,m,seed,target_in_nbr,sole_real,attack_mae\n";
  for (const AttackRow& r : rows) {
    if (with_target) out << r.target << ',';
    out << MethodName(r.method) << ',' << r.k << ','
        << FormatNumber(r.epsilon) << ',' << r.beta << ',' << r.m << ','
        << r.seed << ',' << FormatNumber(r.target_in_nbr) << ','
        << FormatNumber(r.sole_real) << ',' << FormatNumber(r.attack_mae)
        << '\n';
  }
}

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 0;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
      return 2;
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kPermissionDenied:
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDataLoss:
      return 3;
    default:
      return 1;
  }
}

}  // namespace ppns
