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

#include "dpgmm/experiments.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "absl/strings/str_cat.h"
#include "dpgmm/adjacency.h"
#include "dpgmm/divergence.h"
#include "dpgmm/mechanisms.h"
#include "dpgmm/parallel.h"
#include "dpgmm/random.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

constexpr int kLabelAttemptsPerWeights = 100;

std::string FormatDouble(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

uint64_t TrialSeed(uint64_t seed, int trial, int k, int d, int64_t n,
                   int attempt) {
  uint64_t h = Mix64(seed);
  for (uint64_t part :
       {static_cast<uint64_t>(trial), static_cast<uint64_t>(k),
        static_cast<uint64_t>(d), static_cast<uint64_t>(n),
        static_cast<uint64_t>(attempt)}) {
    h = Mix64(h ^ part);
  }
  return h;
}

struct TrialOutcome {
  double kl = 0.0;
  int iterations = 0;
};

absl::StatusOr<TrialOutcome> RunTrial(const SweepSpec& spec, double value,
                                      uint64_t data_seed) {
  SweepBase cfg = spec.base;
  switch (spec.variable) {
    case SweepVariable::kEpsilon:
      cfg.epsilon = value;
      break;
    case SweepVariable::kN:
      cfg.n = static_cast<int64_t>(std::llround(value));
      break;
    case SweepVariable::kK:
      cfg.k = static_cast<int>(std::lround(value));
      break;
    case SweepVariable::kD:
      cfg.d = static_cast<int>(std::lround(value));
      break;
    case SweepVariable::kClip:
      cfg.clip_bound = value;
      break;
  }
  DPGMM_ASSIGN_OR_RETURN(SyntheticData synth,
                         GenerateSynthetic(cfg.k, cfg.d, cfg.n, data_seed));
  AdjacencyMode mode;
  LabeledDataset data = synth.data;
  if (spec.variable == SweepVariable::kClip) {
    data = ClipDataset(data, cfg.clip_bound);
    DPGMM_ASSIGN_OR_RETURN(
        mode, AdjacencyMode::Create(AdjacencyVariant::kFeatureChange,
                                    cfg.clip_bound));
  }
  DPGMM_ASSIGN_OR_RETURN(GmmParams fit, FitGmm(data));
  DPGMM_ASSIGN_OR_RETURN(AdjacencySet adj, EnumerateAdjacency(data, fit, mode));
  DPGMM_ASSIGN_OR_RETURN(
      PrivacySpec privacy,
      PrivacySpec::Create(cfg.epsilon, cfg.delta, cfg.lambda, mode));
  DPGMM_ASSIGN_OR_RETURN(NoisePlan plan,
                         Plan(fit, adj, privacy, spec.plan_options));
  DPGMM_ASSIGN_OR_RETURN(KlReport report, ExpectedKl(fit, plan));
  return TrialOutcome{report.analytic_expected_kl, plan.iterations};
}

}  // namespace

absl::StatusOr<SyntheticData> GenerateSynthetic(int k, int d, int64_t n,
                                                uint64_t seed) {
  if (k < 1 || d < 1 || n < 2 * static_cast<int64_t>(k)) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "synthetic data needs k, d >= 1 and n >= 2k");
  }
  RandomStream rng(seed);
  std::vector<double> weights(k);
  std::vector<int> labels(n);
  std::vector<int64_t> counts(k);
  bool ok = false;
  while (!ok) {
    double total = 0.0;
    for (double& w : weights) {
      w = rng.NextExponential();
      total += w;
    }
    for (double& w : weights) w /= total;
    for (int attempt = 0; attempt < kLabelAttemptsPerWeights && !ok;
         ++attempt) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int64_t i = 0; i < n; ++i) {
        const double u = rng.NextUniform();
        double acc = 0.0;
        int cls = k - 1;
        for (int c = 0; c < k; ++c) {
          acc += weights[c];
          if (u < acc) {
            cls = c;
            break;
          }
        }
        labels[i] = cls + 1;
        ++counts[cls];
      }
      ok = std::all_of(counts.begin(), counts.end(),
                       [](int64_t c) { return c >= 2; });
    }
  }

  GmmParams truth;
  DPGMM_ASSIGN_OR_RETURN(truth.weights, WeightCounts::Create(counts));
  std::vector<LowerTriangularFactor> factors;
  for (int c = 0; c < k; ++c) {
    Vector mu(d);
    for (int j = 0; j < d; ++j) mu(j) = -10.0 + 20.0 * rng.NextUniform();
    truth.means.push_back(std::move(mu));
    truth.covs.push_back(SampleWishart(1.0, d, rng));
    DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol,
                           Cholesky(truth.covs.back()));
    factors.push_back(std::move(chol));
  }
  Matrix points(n, d);
  Vector z(d);
  for (int64_t i = 0; i < n; ++i) {
    const int c = labels[i] - 1;
    for (int j = 0; j < d; ++j) z(j) = rng.NextNormal();
    points.row(i) = (truth.means[c] + factors[c].Apply(z)).transpose();
  }
  DPGMM_ASSIGN_OR_RETURN(LabeledDataset data,
                         LabeledDataset::Create(std::move(points),
                                                std::move(labels), k));
  return SyntheticData{std::move(data), std::move(truth)};
}

absl::string_view SweepVariableName(SweepVariable v) {
  switch (v) {
    case SweepVariable::kEpsilon:
      return "epsilon";
    case SweepVariable::kN:
      return "n";
    case SweepVariable::kK:
      return "k";
    case SweepVariable::kD:
      return "d";
    case SweepVariable::kClip:
      return "clip";
  }
  return "epsilon";
}

absl::StatusOr<SweepVariable> ParseSweepVariable(absl::string_view name) {
  for (SweepVariable v : {SweepVariable::kEpsilon, SweepVariable::kN,
                          SweepVariable::kK, SweepVariable::kD,
                          SweepVariable::kClip}) {
    if (SweepVariableName(v) == name) return v;
  }
  return MakeError(ErrorCode::kInvalidArgument,
                   absl::StrCat("unknown sweep variable '", name,
                                "'; expected epsilon|n|k|d|clip"));
}

absl::StatusOr<SweepResult> RunSweep(const SweepSpec& spec) {
  if (spec.grid.empty() || spec.trials < 1) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "sweep needs a nonempty grid and at least one trial");
  }
  if (spec.variable == SweepVariable::kD) {
    for (double v : spec.grid) {
      if (v > spec.d_cap) {
        return MakeError(ErrorCode::kInvalidArgument,
                         absl::StrCat("d = ", v, " exceeds the cap ",
                                      spec.d_cap));
      }
    }
  }
  const size_t cells = spec.grid.size() * static_cast<size_t>(spec.trials);
  std::vector<SweepRow> rows(cells);
  std::vector<std::optional<std::string>> errors(cells);
  ParallelFor(cells, [&](size_t idx) {
    const size_t vi = idx / spec.trials;
    const int trial = static_cast<int>(idx % spec.trials);
    const double value = spec.grid[vi];
    SweepBase cfg = spec.base;
    if (spec.variable == SweepVariable::kN) cfg.n = std::llround(value);
    if (spec.variable == SweepVariable::kK) cfg.k = static_cast<int>(std::lround(value));
    if (spec.variable == SweepVariable::kD) cfg.d = static_cast<int>(std::lround(value));
    std::string last_error;
    for (int attempt = 0; attempt <= kSweepRetries; ++attempt) {
      const uint64_t data_seed =
          TrialSeed(spec.seed, trial, cfg.k, cfg.d, cfg.n, attempt);
      absl::StatusOr<TrialOutcome> out = RunTrial(spec, value, data_seed);
      if (out.ok()) {
        rows[idx] = SweepRow{value, trial, out->kl, out->iterations,
                             attempt + 1};
        return;
      }
      last_error = std::string(out.status().message());
    }
    errors[idx] = last_error;
  });

  SweepResult result;
  result.variable = spec.variable;
  for (size_t vi = 0; vi < spec.grid.size(); ++vi) {
    SweepSummaryRow summary;
    summary.value = spec.grid[vi];
    std::vector<double> kls;
    for (int trial = 0; trial < spec.trials; ++trial) {
      const size_t idx = vi * spec.trials + trial;
      if (errors[idx].has_value()) {
        result.failures.push_back(
            SweepFailure{spec.grid[vi], trial, *errors[idx]});
        continue;
      }
      result.rows.push_back(rows[idx]);
      kls.push_back(rows[idx].kl);
    }
    summary.count = static_cast<int>(kls.size());
    if (!kls.empty()) {
      double sum = 0.0;
      for (double v : kls) sum += v;
      summary.mean = sum / kls.size();
      if (kls.size() > 1) {
        double ss = 0.0;
        for (double v : kls) ss += (v - summary.mean) * (v - summary.mean);
        const double sd = std::sqrt(ss / (kls.size() - 1));
        summary.half_width = 1.96 * sd / std::sqrt(static_cast<double>(kls.size()));
      }
    }
    result.summary.push_back(summary);
  }
  return result;
}

absl::Status WriteSweep(const SweepResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return MakeError(ErrorCode::kIoError,
                     absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  const std::string name(SweepVariableName(result.variable));
  const std::filesystem::path base(dir);

  std::ofstream raw(base / "raw.csv", std::ios::binary | std::ios::trunc);
  raw << "variable,value,trial,kl\n";
  for (const SweepRow& r : result.rows) {
    raw << name << ',' << FormatDouble(r.value) << ',' << r.trial << ','
        << FormatDouble(r.kl) << '\n';
  }
  std::ofstream summary(base / "summary.csv",
                        std::ios::binary | std::ios::trunc);
  summary << "variable,value,count,mean,half_width\n";
  for (const SweepSummaryRow& s : result.summary) {
    summary << name << ',' << FormatDouble(s.value) << ',' << s.count << ','
            << FormatDouble(s.mean) << ',' << FormatDouble(s.half_width)
            << '\n';
  }
  std::ofstream failures(base / "failures.csv",
                         std::ios::binary | std::ios::trunc);
  failures << "variable,value,trial,message\n";
  for (const SweepFailure& f : result.failures) {
    std::string message = f.message;
    for (char& ch : message) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    failures << name << ',' << FormatDouble(f.value) << ',' << f.trial << ','
             << message << '\n';
  }
  if (!raw || !summary || !failures) {
    return MakeError(ErrorCode::kIoError,
                     absl::StrCat("failed writing sweep tables to ", dir));
  }
  return absl::OkStatus();
}

}  // namespace dpgmm
