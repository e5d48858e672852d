// Copyright 2026 The dpgmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dpgmm/adjacency.h"
#include "dpgmm/audit.h"
#include "dpgmm/divergence.h"
#include "dpgmm/experiments.h"
#include "dpgmm/mechanisms.h"
#include "dpgmm/model.h"
#include "dpgmm/noise_plan.h"
#include "dpgmm/planner.h"
#include "dpgmm/serialization.h"
#include "dpgmm/status.h"

namespace dpgmm::cli {
namespace {

struct FitFlags {
  std::string input;
  int k = 0;
  bool kmeans = false;
  std::optional<double> clip;
  uint64_t seed = 0;
  std::string labels_output;
  std::string output;
};

struct PlanFlags {
  std::string model;
  std::string input;
  double epsilon = 1.0;
  double delta = 1e-5;
  double lambda = 1e-3;
  std::string adjacency = "label";
  std::optional<double> clip;
  bool uniform_bound = false;
  double eps0_frac = 1.0 / 3.0;
  int max_iter = 50;
  std::string output;
};

struct ReleaseFlags {
  std::string model;
  std::string plan;
  uint64_t seed = 0;
  std::string output;
};

struct EvaluateFlags {
  std::string model;
  std::string plan;
  std::string released;
  int64_t mc = 0;
  uint64_t seed = 0;
  std::string output;
};

struct SampleFlags {
  std::string released;
  int64_t n = 0;
  uint64_t seed = 0;
  std::string output;
};

struct AuditFlags {
  std::string model;
  std::string input;
  std::string plan;
  bool strict = false;
  int64_t draws = 100000;
  uint64_t seed = 0;
  std::string output;
};

struct ExperimentFlags {
  std::string sweep;
  std::vector<double> grid;
  int trials = 20;
  std::string out;
  uint64_t seed = 0;
  int d_cap = 6;
  SweepBase base;
};

// A usage problem found after CLI11 accepted the flags.
absl::Status UsageError(absl::string_view message) {
  return absl::InvalidArgumentError(message);
}

bool IsUsageError(const absl::Status& status) {
  return status.code() == absl::StatusCode::kInvalidArgument &&
         ErrorCodeOf(status) == ErrorCode::kNone;
}

absl::StatusOr<GmmParams> LoadModel(const std::string& path) {
  DPGMM_ASSIGN_OR_RETURN(Json j, ReadJsonFile(path));
  return ModelFromJson(j);
}

absl::StatusOr<NoisePlan> LoadPlan(const std::string& path) {
  DPGMM_ASSIGN_OR_RETURN(Json j, ReadJsonFile(path));
  return PlanFromJson(j);
}

absl::Status CheckModelMatchesData(const GmmParams& model,
                                   const LabeledDataset& data) {
  if (model.d() != data.d() || model.weights.counts != data.class_sizes()) {
    return MakeError(ErrorCode::kSchemaMismatch,
                     "model does not match the dataset (dimension or class "
                     "counts differ)");
  }
  return absl::OkStatus();
}

// Rebuilds the adjacency the plan was made for: optional clipping, the
// enumeration itself and the optional uniform bound.
absl::StatusOr<AdjacencySet> BuildAdjacency(const LabeledDataset& raw,
                                            const GmmParams& model,
                                            const AdjacencyMode& mode,
                                            bool uniform_bound) {
  LabeledDataset data = raw;
  if (mode.clip_bound.has_value()) data = ClipDataset(raw, *mode.clip_bound);
  DPGMM_RETURN_IF_ERROR(CheckModelMatchesData(model, data));
  DPGMM_ASSIGN_OR_RETURN(AdjacencySet adj,
                         EnumerateAdjacency(data, model, mode));
  if (uniform_bound) {
    if (!mode.clip_bound.has_value()) {
      return UsageError("--uniform-bound requires --clip");
    }
    DPGMM_ASSIGN_OR_RETURN(adj,
                           ApplyUniformBound(data, std::move(adj),
                                             *mode.clip_bound));
  }
  return adj;
}

absl::Status RunFit(const FitFlags& f, std::ostream& out) {
  if (f.clip.has_value() && !(*f.clip > 0)) {
    return UsageError("--clip must be positive");
  }
  std::optional<LabeledDataset> data;
  if (f.kmeans) {
    DPGMM_ASSIGN_OR_RETURN(Matrix points, LoadFeatures(f.input));
    if (f.clip.has_value()) {
      DPGMM_ASSIGN_OR_RETURN(
          LabeledDataset unlabeled,
          LabeledDataset::Create(points, std::vector<int>(points.rows(), 1),
                                 1));
      points = ClipDataset(unlabeled, *f.clip).points();
    }
    if (points.rows() < f.k) {
      return MakeError(ErrorCode::kDegenerateClass,
                       "fewer records than clusters");
    }
    std::vector<int> labels = KMeansLabel(points, f.k, f.seed);
    DPGMM_ASSIGN_OR_RETURN(
        data, LabeledDataset::Create(std::move(points), std::move(labels),
                                     f.k));
  } else {
    DPGMM_ASSIGN_OR_RETURN(data, LoadDataset(f.input, f.k));
    if (f.clip.has_value()) data = ClipDataset(*data, *f.clip);
  }
  DPGMM_ASSIGN_OR_RETURN(GmmParams model, FitGmm(*data));
  if (!f.labels_output.empty()) {
    std::ostringstream csv;
    WriteDatasetCsv(csv, data->points(), data->labels());
    DPGMM_RETURN_IF_ERROR(WriteTextFile(f.labels_output, csv.str()));
  }
  DPGMM_RETURN_IF_ERROR(WriteTextFile(f.output, DumpJson(ModelToJson(model))));
  out << "fit: k=" << model.k() << " d=" << model.d() << " n=" << model.n()
      << "\n";
  return absl::OkStatus();
}

absl::Status RunPlan(const PlanFlags& f, std::ostream& out) {
  DPGMM_ASSIGN_OR_RETURN(AdjacencyVariant variant,
                         ParseAdjacency(f.adjacency));
  if ((variant == AdjacencyVariant::kFeatureChange ||
       variant == AdjacencyVariant::kAddOne) &&
      !f.clip.has_value()) {
    return UsageError(
        absl::StrCat("--adjacency ", f.adjacency, " requires --clip"));
  }
  if (f.uniform_bound && !f.clip.has_value()) {
    return UsageError("--uniform-bound requires --clip");
  }
  if (!(f.eps0_frac > 0 && f.eps0_frac < 0.5)) {
    return UsageError("--eps0-frac must lie in (0, 0.5)");
  }
  DPGMM_ASSIGN_OR_RETURN(AdjacencyMode mode,
                         AdjacencyMode::Create(variant, f.clip));
  DPGMM_ASSIGN_OR_RETURN(
      PrivacySpec spec,
      PrivacySpec::Create(f.epsilon, f.delta, f.lambda, mode));
  DPGMM_ASSIGN_OR_RETURN(GmmParams model, LoadModel(f.model));
  DPGMM_ASSIGN_OR_RETURN(LabeledDataset data, LoadDataset(f.input, model.k()));
  DPGMM_ASSIGN_OR_RETURN(AdjacencySet adj,
                         BuildAdjacency(data, model, mode, f.uniform_bound));
  PlanOptions options;
  options.eps0_frac = f.eps0_frac;
  options.max_iter = f.max_iter;
  DPGMM_ASSIGN_OR_RETURN(NoisePlan plan, Plan(model, adj, spec, options));
  DPGMM_RETURN_IF_ERROR(WriteTextFile(f.output, DumpJson(PlanToJson(plan))));
  out << "plan: eps0=" << plan.eps0 << " iterations=" << plan.iterations
      << "\n";
  return absl::OkStatus();
}

absl::Status RunRelease(const ReleaseFlags& f, std::ostream& out) {
  DPGMM_ASSIGN_OR_RETURN(GmmParams model, LoadModel(f.model));
  DPGMM_ASSIGN_OR_RETURN(NoisePlan plan, LoadPlan(f.plan));
  DPGMM_ASSIGN_OR_RETURN(ReleasedGmm released, Release(model, plan, f.seed));
  DPGMM_RETURN_IF_ERROR(
      WriteTextFile(f.output, DumpJson(ReleasedToJson(released))));
  out << "release: seed=" << f.seed << "\n";
  return absl::OkStatus();
}

absl::Status RunEvaluate(const EvaluateFlags& f, std::ostream& out) {
  DPGMM_ASSIGN_OR_RETURN(GmmParams model, LoadModel(f.model));
  DPGMM_ASSIGN_OR_RETURN(NoisePlan plan, LoadPlan(f.plan));
  DPGMM_ASSIGN_OR_RETURN(KlReport report, ExpectedKl(model, plan));
  if (f.mc > 0) {
    DPGMM_ASSIGN_OR_RETURN(McEstimate mc,
                           MonteCarloExpectedKl(model, plan, f.mc, f.seed));
    report.mc_estimate = mc.mean;
    report.mc_stderr = mc.standard_error;
    report.mc_trials = f.mc;
  }
  Json j = KlReportToJson(report);
  if (!f.released.empty()) {
    DPGMM_ASSIGN_OR_RETURN(Json rj, ReadJsonFile(f.released));
    DPGMM_ASSIGN_OR_RETURN(ReleasedGmm released, ReleasedFromJson(rj));
    DPGMM_ASSIGN_OR_RETURN(double realized,
                           RealizedKl(released.params, model));
    j["realized_kl"] = realized;
  }
  DPGMM_RETURN_IF_ERROR(WriteTextFile(f.output, DumpJson(j)));
  out << "evaluate: expected_kl=" << report.analytic_expected_kl << "\n";
  return absl::OkStatus();
}

absl::Status RunSample(const SampleFlags& f, std::ostream& out) {
  DPGMM_ASSIGN_OR_RETURN(Json j, ReadJsonFile(f.released));
  DPGMM_ASSIGN_OR_RETURN(ReleasedGmm released, ReleasedFromJson(j));
  DPGMM_ASSIGN_OR_RETURN(SyntheticSample sample,
                         SampleFromGmm(released.params, f.n, f.seed));
  std::ostringstream csv;
  WriteDatasetCsv(csv, sample.points, sample.labels);
  DPGMM_RETURN_IF_ERROR(WriteTextFile(f.output, csv.str()));
  out << "sample: n=" << f.n << "\n";
  return absl::OkStatus();
}

absl::StatusOr<bool> RunAudit(const AuditFlags& f, std::ostream& out) {
  DPGMM_ASSIGN_OR_RETURN(GmmParams model, LoadModel(f.model));
  DPGMM_ASSIGN_OR_RETURN(NoisePlan plan, LoadPlan(f.plan));
  DPGMM_ASSIGN_OR_RETURN(LabeledDataset data, LoadDataset(f.input, model.k()));
  DPGMM_ASSIGN_OR_RETURN(
      AdjacencySet adj,
      BuildAdjacency(data, model, plan.mode, plan.uniform_bound));
  DPGMM_ASSIGN_OR_RETURN(
      PrivacySpec spec,
      PrivacySpec::Create(plan.epsilon, plan.delta, plan.lambda, plan.mode));
  AuditOptions options;
  options.strict = f.strict;
  options.draws = f.draws;
  options.seed = f.seed;
  DPGMM_ASSIGN_OR_RETURN(AuditReport report,
                         Audit(plan, adj, spec, options));
  DPGMM_RETURN_IF_ERROR(WriteTextFile(f.output, DumpJson(AuditToJson(report))));
  out << "audit: " << (report.hard_failure() ? "FAILED" : "ok") << "\n";
  return !report.hard_failure();
}

absl::Status RunExperiment(const ExperimentFlags& f, std::ostream& out) {
  SweepSpec spec;
  DPGMM_ASSIGN_OR_RETURN(spec.variable, ParseSweepVariable(f.sweep));
  spec.grid = f.grid;
  spec.trials = f.trials;
  spec.seed = f.seed;
  spec.d_cap = f.d_cap;
  spec.base = f.base;
  DPGMM_ASSIGN_OR_RETURN(SweepResult result, RunSweep(spec));
  DPGMM_RETURN_IF_ERROR(WriteSweep(result, f.out));
  for (const SweepSummaryRow& row : result.summary) {
    out << f.sweep << "=" << row.value << " mean_kl=" << row.mean << " +- "
        << row.half_width << " (" << row.count << " trials)\n";
  }
  return absl::OkStatus();
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Differentially private Gaussian mixture release"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  FitFlags fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a GMM to labeled data");
  fit_cmd->add_option("--input", fit.input, "Dataset CSV")->required();
  fit_cmd->add_option("--k", fit.k, "Number of classes")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--kmeans", fit.kmeans,
                    "Label the records with k-means first");
  fit_cmd->add_option("--clip", fit.clip, "Clip feature norms to B");
  fit_cmd->add_option("--seed", fit.seed, "Seed for k-means seeding");
  fit_cmd->add_option("--labels-output", fit.labels_output,
                      "Write the (clipped, labeled) dataset used for the fit");
  fit_cmd->add_option("--output", fit.output, "Model JSON")->required();

  PlanFlags plan;
  CLI::App* plan_cmd = app.add_subcommand("plan", "Plan the noise parameters");
  plan_cmd->add_option("--model", plan.model, "Model JSON")->required();
  plan_cmd->add_option("--input", plan.input, "Dataset CSV")->required();
  plan_cmd->add_option("--epsilon", plan.epsilon)->required();
  plan_cmd->add_option("--delta", plan.delta)->required();
  plan_cmd->add_option("--lambda", plan.lambda, "Uniform smoothing weight");
  plan_cmd->add_option("--adjacency", plan.adjacency)
      ->check(CLI::IsMember({"label", "remove", "add", "feature"}));
  plan_cmd->add_option("--clip", plan.clip, "Feature norm bound B");
  plan_cmd->add_flag("--uniform-bound", plan.uniform_bound,
                     "Replace enumerated differences by the norm bound");
  plan_cmd->add_option("--eps0-frac", plan.eps0_frac,
                       "Initial eps0 as a fraction of epsilon");
  plan_cmd->add_option("--max-iter", plan.max_iter)
      ->check(CLI::PositiveNumber);
  plan_cmd->add_option("--output", plan.output, "Plan JSON")->required();

  ReleaseFlags release;
  CLI::App* release_cmd =
      app.add_subcommand("release", "Draw a private release");
  release_cmd->add_option("--model", release.model)->required();
  release_cmd->add_option("--plan", release.plan)->required();
  release_cmd->add_option("--seed", release.seed)->required();
  release_cmd->add_option("--output", release.output)->required();

  EvaluateFlags evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Expected KL of a plan");
  evaluate_cmd->add_option("--model", evaluate.model)->required();
  evaluate_cmd->add_option("--plan", evaluate.plan)->required();
  evaluate_cmd->add_option("--released", evaluate.released,
                           "Also report the KL of this release");
  evaluate_cmd->add_option("--mc", evaluate.mc, "Monte Carlo trials")
      ->check(CLI::NonNegativeNumber);
  evaluate_cmd->add_option("--seed", evaluate.seed);
  evaluate_cmd->add_option("--output", evaluate.output)->required();

  SampleFlags sample;
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "Synthetic records from a release");
  sample_cmd->add_option("--released", sample.released)->required();
  sample_cmd->add_option("-n,--n", sample.n)
      ->required()
      ->check(CLI::NonNegativeNumber);
  sample_cmd->add_option("--seed", sample.seed);
  sample_cmd->add_option("--output", sample.output)->required();

  AuditFlags audit;
  CLI::App* audit_cmd = app.add_subcommand("audit", "Verify a plan");
  audit_cmd->add_option("--model", audit.model)->required();
  audit_cmd->add_option("--input", audit.input)->required();
  audit_cmd->add_option("--plan", audit.plan)->required();
  audit_cmd->add_flag("--strict", audit.strict);
  audit_cmd->add_option("--draws", audit.draws)->check(CLI::PositiveNumber);
  audit_cmd->add_option("--seed", audit.seed);
  audit_cmd->add_option("--output", audit.output)->required();

  ExperimentFlags experiment;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "Sweep the expected KL");
  experiment_cmd->add_option("--sweep", experiment.sweep)
      ->required()
      ->check(CLI::IsMember({"epsilon", "n", "k", "d", "clip"}));
  experiment_cmd->add_option("--grid", experiment.grid)
      ->required()
      ->delimiter(',');
  experiment_cmd->add_option("--trials", experiment.trials)
      ->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--out", experiment.out)->required();
  experiment_cmd->add_option("--seed", experiment.seed);
  experiment_cmd->add_option("--d-cap", experiment.d_cap);
  experiment_cmd->add_option("--k", experiment.base.k);
  experiment_cmd->add_option("--d", experiment.base.d);
  experiment_cmd->add_option("--n", experiment.base.n);
  experiment_cmd->add_option("--epsilon", experiment.base.epsilon);
  experiment_cmd->add_option("--delta", experiment.base.delta);
  experiment_cmd->add_option("--lambda", experiment.base.lambda);
  experiment_cmd->add_option("--clip", experiment.base.clip_bound);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk
                                                             : kExitUsageError;
  }

  absl::Status status;
  int exit_code = kExitOk;
  if (fit_cmd->parsed()) {
    status = RunFit(fit, out);
  } else if (plan_cmd->parsed()) {
    status = RunPlan(plan, out);
  } else if (release_cmd->parsed()) {
    status = RunRelease(release, out);
  } else if (evaluate_cmd->parsed()) {
    status = RunEvaluate(evaluate, out);
  } else if (sample_cmd->parsed()) {
    status = RunSample(sample, out);
  } else if (audit_cmd->parsed()) {
    absl::StatusOr<bool> passed = RunAudit(audit, out);
    status = passed.status();
    if (passed.ok() && !*passed) exit_code = kExitAuditFailed;
  } else if (experiment_cmd->parsed()) {
    status = RunExperiment(experiment, out);
  }
  if (!status.ok()) {
    err << "error: " << status.message() << "\n";
    return IsUsageError(status) ? kExitUsageError : kExitRuntimeError;
  }
  return exit_code;
}

}  // namespace dpgmm::cli
