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

// ppns: experiment harness for partitioned probabilistic neighbour
// selection and its baselines.
//
//   ppns run --dataset data/ml-100k/u.data --method knn,npns,pncf,ppns
//            --k 100 --epsilon 1 --beta 1,2,3,4 --trials 5 --seed 7 --out out
//   ppns run ... --attack-m 2,4,8,16 --k 50 --beta 7      # attack grid
//   ppns optimality --k 4 --beta 3 --out out/opt
//   ppns similarity --dataset data/ml-100k/u.data --target 1 --out out/sim
//
// Exit codes: 0 ok, 2 validation, 3 I/O.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "ppns/experiment.h"
#include "ppns/metrics.h"
#include "ppns/random.h"
#include "ppns/ratings.h"
#include "ppns/selection.h"
#include "ppns/similarity.h"

namespace {

using ::ppns::ExitCodeFor;

template <typename T>
absl::StatusOr<std::vector<T>> ParseList(const std::string& text,
                                         const std::string& flag) {
  std::vector<T> out;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    std::string item(part);
    try {
      size_t used = 0;
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(std::stod(item, &used));
      } else {
        out.push_back(static_cast<T>(std::stol(item, &used)));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      return absl::InvalidArgumentError(
          absl::StrCat("--", flag, ": cannot parse `", item, "`"));
    }
  }
  return out;
}

int Fail(const absl::Status& status) {
  std::cerr << "ppns: " << status.message() << "\n";
  return ExitCodeFor(status);
}

struct RunFlags {
  std::string dataset;
  std::string format = "movielens";
  std::string mode = "user";
  std::string methods = "knn,npns,pncf,ppns";
  std::string ks = "100";
  std::string epsilons = "1";
  std::string betas = "1";
  std::string attack_ms;
  double rho = 0.5;
  std::optional<double> laplace_scale;
  std::string lambda_mode = "attack";
  std::string rs_scope = "target";
  std::optional<double> rs;
  int trials = 5;
  uint64_t seed = 1;
  std::string out = "out";
  int targets = 200;
  int attack_targets = 20;
  std::string x_axis = "auto";
  int threads = 0;
};

absl::StatusOr<ppns::ExperimentSpec> BuildSpec(const RunFlags& f) {
  ppns::ExperimentSpec spec;
  spec.dataset = f.dataset;
  if (f.format == "movielens") {
    spec.format = ppns::DatasetFormat::kMovieLens;
  } else if (f.format == "csv") {
    spec.format = ppns::DatasetFormat::kCsv;
  } else {
    return absl::InvalidArgumentError("--format must be movielens or csv");
  }
  if (f.mode == "user") {
    spec.mode = ppns::Axis::kUserBased;
  } else if (f.mode == "item") {
    spec.mode = ppns::Axis::kItemBased;
  } else {
    return absl::InvalidArgumentError("--mode must be user or item");
  }
  for (absl::string_view name :
       absl::StrSplit(f.methods, ',', absl::SkipEmpty())) {
    absl::StatusOr<ppns::Method> m = ppns::ParseMethod(std::string(name));
    if (!m.ok()) return m.status();
    spec.methods.push_back(*m);
  }
  auto ks = ParseList<int>(f.ks, "k");
  if (!ks.ok()) return ks.status();
  auto eps = ParseList<double>(f.epsilons, "epsilon");
  if (!eps.ok()) return eps.status();
  auto betas = ParseList<int>(f.betas, "beta");
  if (!betas.ok()) return betas.status();
  auto ms = ParseList<int>(f.attack_ms, "attack-m");
  if (!ms.ok()) return ms.status();
  spec.ks = *ks;
  spec.epsilons = *eps;
  spec.betas = *betas;
  spec.attack_ms = *ms;

  spec.rho = f.rho;
  spec.pncf_laplace_scale = f.laplace_scale;
  if (f.lambda_mode == "attack") {
    spec.lambda_mode = ppns::LambdaMode::kAttack;
  } else if (f.lambda_mode == "formula") {
    spec.lambda_mode = ppns::LambdaMode::kFormula;
  } else {
    return absl::InvalidArgumentError("--lambda-mode must be attack or formula");
  }
  if (f.rs_scope == "target") {
    spec.sensitivity.scope = ppns::SensitivityScope::kTargetLocal;
  } else if (f.rs_scope == "global") {
    spec.sensitivity.scope = ppns::SensitivityScope::kGlobal;
  } else {
    return absl::InvalidArgumentError("--rs-scope must be target or global");
  }
  spec.sensitivity.fixed_rs = f.rs;
  spec.trials = f.trials;
  spec.seed = f.seed;
  spec.out_dir = f.out;
  spec.targets = f.targets;
  spec.attack_targets = f.attack_targets;
  spec.threads = f.threads;
  if (f.x_axis == "auto") {
    spec.plot_axis = ppns::PlotAxis::kAuto;
  } else if (f.x_axis == "beta") {
    spec.plot_axis = ppns::PlotAxis::kBeta;
  } else if (f.x_axis == "k") {
    spec.plot_axis = ppns::PlotAxis::kK;
  } else if (f.x_axis == "epsilon") {
    spec.plot_axis = ppns::PlotAxis::kEpsilon;
  } else if (f.x_axis == "m") {
    spec.plot_axis = ppns::PlotAxis::kM;
  } else {
    return absl::InvalidArgumentError(
        "--x-axis must be auto, beta, k, epsilon or m");
  }
  return spec;
}

int RunCommand(const RunFlags& flags) {
  absl::StatusOr<ppns::ExperimentSpec> spec = BuildSpec(flags);
  if (!spec.ok()) return Fail(spec.status());
  absl::StatusOr<ppns::ExperimentResult> result = ppns::RunExperiment(*spec);
  if (!result.ok()) return Fail(result.status());
  for (const std::string& file : result->files) std::cout << file << "\n";
  return 0;
}

struct OptimalityFlags {
  std::string dataset;
  std::string format = "movielens";
  int64_t target = -1;
  std::string ks = "1,2,3,4";
  std::string betas = "1,2,3,4";
  double epsilon = 1.0;
  std::optional<double> rs;
  int fixtures = 20;
  uint64_t seed = 1;
  std::string out = "out";
};

// Strictly descending similarities in (0, 1).
ppns::SimilarityRow RandomDescendingRow(int32_t size, ppns::Rng& rng) {
  std::vector<double> sims(size);
  for (double& s : sims) s = rng.Uniform();
  std::sort(sims.begin(), sims.end(), std::greater<>());
  ppns::SimilarityRow row;
  for (int32_t i = 0; i < size; ++i) row.candidates.push_back({i + 1, sims[i]});
  return row;
}

int OptimalityCommand(const OptimalityFlags& f) {
  auto ks = ParseList<int>(f.ks, "k");
  if (!ks.ok()) return Fail(ks.status());
  auto betas = ParseList<int>(f.betas, "beta");
  if (!betas.ok()) return Fail(betas.status());

  std::vector<ppns::SimilarityRow> rows;
  std::optional<ppns::SensitivityValue> rs;
  if (f.rs) rs = ppns::SensitivityValue{*f.rs, ppns::SensitivityScope::kGlobal};
  if (!f.dataset.empty()) {
    auto matrix = ppns::ReadDataset(f.dataset, f.format == "csv"
                                                   ? ppns::DatasetFormat::kCsv
                                                   : ppns::DatasetFormat::kMovieLens);
    if (!matrix.ok()) return Fail(matrix.status());
    std::optional<int32_t> target = matrix->FindUser(f.target);
    if (!target) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat("--target ", f.target, " not in dataset")));
    }
    rows.push_back(ppns::ComputeSimilarityRow(*matrix, *target));
    if (!rs) {
      auto local = ppns::TargetSensitivity(*matrix, *target);
      if (!local.ok()) return Fail(local.status());
      rs = *local;
    }
  } else {
    ppns::Rng rng(f.seed);
    const int max_k = *std::max_element(ks->begin(), ks->end());
    const int max_beta = *std::max_element(betas->begin(), betas->end());
    for (int i = 0; i < f.fixtures; ++i) {
      rows.push_back(RandomDescendingRow(max_k * max_beta, rng));
    }
    if (!rs) rs = ppns::SensitivityValue{1.0, ppns::SensitivityScope::kGlobal};
  }

  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  const std::string path =
      (std::filesystem::path(f.out) / "optimality.csv").string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (ec || !out) {
    return Fail(absl::UnavailableError(absl::StrCat("cannot write ", path)));
  }
  int checked = 0;
  int optimal = 0;
  bool header = true;
  for (const ppns::SimilarityRow& row : rows) {
    for (int k : *ks) {
      for (int beta : *betas) {
        auto weights = ppns::ComputeSelectionWeights(row, f.epsilon, k, *rs);
        if (!weights.ok()) return Fail(weights.status());
        auto report = ppns::VerifyAllocationOptimality(row, k, beta, *weights);
        if (!report.ok()) return Fail(report.status());
        ppns::WriteOptimalityCsv(*report, out, header);
        header = false;
        ++checked;
        optimal += report->ppns_optimal;
      }
    }
  }
  std::cout << path << "\n"
            << optimal << "/" << checked
            << " cases: the (k-1, 0, ..., 0, 1) allocation attains the max\n";
  return optimal == checked ? 0 : 1;
}

struct SimilarityFlags {
  std::string dataset;
  std::string format = "movielens";
  std::string mode = "user";
  std::vector<int64_t> targets;
  std::string out = "out";
};

int SimilarityCommand(const SimilarityFlags& f) {
  auto matrix = ppns::ReadDataset(f.dataset, f.format == "csv"
                                                 ? ppns::DatasetFormat::kCsv
                                                 : ppns::DatasetFormat::kMovieLens);
  if (!matrix.ok()) return Fail(matrix.status());
  const ppns::RatingMatrix m =
      f.mode == "item" ? matrix->Transpose() : *std::move(matrix);
  std::vector<ppns::SimilarityRow> rows;
  for (int64_t id : f.targets) {
    std::optional<int32_t> t = m.FindUser(id);
    if (!t) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat("--target ", id, " not in dataset")));
    }
    rows.push_back(ppns::ComputeSimilarityRow(m, *t));
  }
  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  const std::string path =
      (std::filesystem::path(f.out) / "similarity.csv").string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (ec || !out) {
    return Fail(absl::UnavailableError(absl::StrCat("cannot write ", path)));
  }
  ppns::WriteSimilarityRowsCsv(m, rows, out);
  std::cout << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioned probabilistic neighbour selection experiments"};
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd =
      app.add_subcommand("run", "MAE or attack experiment over a grid");
  run_cmd->add_option("--dataset", run.dataset, "ratings file")->required();
  run_cmd->add_option("--format", run.format, "movielens | csv");
  run_cmd->add_option("--mode", run.mode, "user | item");
  run_cmd->add_option("--method", run.methods, "comma list of methods");
  run_cmd->add_option("--k", run.ks, "comma list of neighbourhood sizes");
  run_cmd->add_option("--epsilon", run.epsilons, "comma list of budgets");
  run_cmd->add_option("--beta", run.betas, "comma list of security levels");
  run_cmd->add_option("--rho", run.rho, "PNCF formula constant in (0, 1)");
  run_cmd->add_option("--pncf-laplace-scale", run.laplace_scale,
                      "PNCF similarity noise scale (default 2 rs / epsilon, "
                      "0 disables)");
  run_cmd->add_option("--lambda-mode", run.lambda_mode,
                      "PNCF truncation: attack | formula");
  run_cmd->add_option("--rs-scope", run.rs_scope, "target | global");
  run_cmd->add_option("--rs", run.rs, "fixed sensitivity value");
  run_cmd->add_option("--attack-m", run.attack_ms,
                      "comma list of known-item counts; enables attack mode");
  run_cmd->add_option("--trials", run.trials,
                      "selection seeds (MAE) or trials per target (attack)");
  run_cmd->add_option("--seed", run.seed, "master seed");
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_option("--targets", run.targets, "evaluated rows");
  run_cmd->add_option("--attack-targets", run.attack_targets,
                      "attacked users");
  run_cmd->add_option("--x-axis", run.x_axis,
                      "plot x axis: auto | beta | k | epsilon | m");
  run_cmd->add_option("--threads", run.threads, "worker threads (0 = all)");

  OptimalityFlags opt;
  CLI::App* opt_cmd = app.add_subcommand(
      "optimality", "enumerate allocations and check the PPNS allocation");
  opt_cmd->add_option("--dataset", opt.dataset,
                      "ratings file (random fixtures when omitted)");
  opt_cmd->add_option("--format", opt.format, "movielens | csv");
  opt_cmd->add_option("--target", opt.target, "external user id");
  opt_cmd->add_option("--k", opt.ks, "comma list, each <= 6");
  opt_cmd->add_option("--beta", opt.betas, "comma list, each <= 5");
  opt_cmd->add_option("--epsilon", opt.epsilon, "privacy budget");
  opt_cmd->add_option("--rs", opt.rs, "fixed sensitivity value");
  opt_cmd->add_option("--fixtures", opt.fixtures, "random fixtures");
  opt_cmd->add_option("--seed", opt.seed, "fixture seed");
  opt_cmd->add_option("--out", opt.out, "output directory");

  SimilarityFlags sim;
  CLI::App* sim_cmd =
      app.add_subcommand("similarity", "dump sorted candidate lists");
  sim_cmd->add_option("--dataset", sim.dataset, "ratings file")->required();
  sim_cmd->add_option("--format", sim.format, "movielens | csv");
  sim_cmd->add_option("--mode", sim.mode, "user | item");
  sim_cmd->add_option("--target", sim.targets, "external id(s)")->required();
  sim_cmd->add_option("--out", sim.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run_cmd) return RunCommand(run);
  if (*opt_cmd) return OptimalityCommand(opt);
  if (*sim_cmd) return SimilarityCommand(sim);
  return 2;
}
