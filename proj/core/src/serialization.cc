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

#include "dpgmm/serialization.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

absl::Status Mismatch(const std::string& path, absl::string_view what) {
  return MakeError(ErrorCode::kSchemaMismatch, absl::StrCat(path, ": ", what));
}

absl::StatusOr<const Json*> Field(const Json& obj, const std::string& path,
                                  const char* key) {
  if (!obj.is_object()) return Mismatch(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) return Mismatch(absl::StrCat(path, ".", key), "missing");
  return &*it;
}

absl::StatusOr<double> AsDouble(const Json& v, const std::string& path) {
  if (!v.is_number()) return Mismatch(path, "expected a number");
  return v.get<double>();
}

absl::StatusOr<int64_t> AsInt(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) return Mismatch(path, "expected an integer");
  return v.get<int64_t>();
}

absl::StatusOr<double> DoubleField(const Json& obj, const std::string& path,
                                   const char* key) {
  DPGMM_ASSIGN_OR_RETURN(const Json* v, Field(obj, path, key));
  return AsDouble(*v, absl::StrCat(path, ".", key));
}

absl::StatusOr<int64_t> IntField(const Json& obj, const std::string& path,
                                 const char* key) {
  DPGMM_ASSIGN_OR_RETURN(const Json* v, Field(obj, path, key));
  return AsInt(*v, absl::StrCat(path, ".", key));
}

absl::StatusOr<const Json*> ArrayField(const Json& obj, const std::string& path,
                                       const char* key) {
  DPGMM_ASSIGN_OR_RETURN(const Json* v, Field(obj, path, key));
  if (!v->is_array()) {
    return Mismatch(absl::StrCat(path, ".", key), "expected an array");
  }
  return v;
}

absl::StatusOr<Vector> AsVector(const Json& v, const std::string& path,
                                int expected) {
  if (!v.is_array()) return Mismatch(path, "expected an array");
  if (expected >= 0 && static_cast<int>(v.size()) != expected) {
    return Mismatch(path, absl::StrCat("expected ", expected, " entries"));
  }
  Vector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    DPGMM_ASSIGN_OR_RETURN(out(i), AsDouble(v[i], absl::StrCat(path, "[", i, "]")));
  }
  return out;
}

absl::StatusOr<Matrix> AsMatrix(const Json& v, const std::string& path,
                                int rows, int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows) {
    return Mismatch(path, absl::StrCat("expected ", rows, " rows"));
  }
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    DPGMM_ASSIGN_OR_RETURN(Vector row,
                           AsVector(v[i], absl::StrCat(path, "[", i, "]"), cols));
    out.row(i) = row.transpose();
  }
  return out;
}

absl::StatusOr<WeightCounts> AsCounts(const Json& v, const std::string& path) {
  if (!v.is_array()) return Mismatch(path, "expected an array");
  std::vector<int64_t> counts;
  for (size_t i = 0; i < v.size(); ++i) {
    DPGMM_ASSIGN_OR_RETURN(int64_t c, AsInt(v[i], absl::StrCat(path, "[", i, "]")));
    counts.push_back(c);
  }
  absl::StatusOr<WeightCounts> out = WeightCounts::Create(std::move(counts));
  if (!out.ok()) return Mismatch(path, out.status().message());
  return out;
}

Json VectorJson(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json MatrixJson(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.push_back(VectorJson(m.row(i).transpose()));
  }
  return out;
}

Json CountsJson(const WeightCounts& w) { return Json(w.counts); }

absl::StatusOr<AdjacencyMode> ModeFromJson(const Json& j,
                                           const std::string& path) {
  DPGMM_ASSIGN_OR_RETURN(const Json* name, Field(j, path, "adjacency"));
  if (!name->is_string()) {
    return Mismatch(absl::StrCat(path, ".adjacency"), "expected a string");
  }
  absl::StatusOr<AdjacencyVariant> variant =
      ParseAdjacency(name->get<std::string>());
  if (!variant.ok()) {
    return Mismatch(absl::StrCat(path, ".adjacency"), variant.status().message());
  }
  AdjacencyMode mode;
  mode.variant = *variant;
  auto clip = j.find("clip_bound");
  if (clip != j.end() && !clip->is_null()) {
    DPGMM_ASSIGN_OR_RETURN(double b,
                           AsDouble(*clip, absl::StrCat(path, ".clip_bound")));
    mode.clip_bound = b;
  }
  return mode;
}

}  // namespace

Json ModelToJson(const GmmParams& model) {
  Json j;
  j["k"] = model.k();
  j["d"] = model.d();
  j["n"] = model.n();
  j["counts"] = CountsJson(model.weights);
  Json comps = Json::array();
  for (int c = 0; c < model.k(); ++c) {
    Json comp;
    comp["mean"] = VectorJson(model.means[c]);
    comp["cov"] = MatrixJson(model.covs[c].matrix());
    comps.push_back(std::move(comp));
  }
  j["components"] = std::move(comps);
  j["regularization"] = model.regularization;
  return j;
}

absl::StatusOr<GmmParams> ModelFromJson(const Json& j) {
  const std::string root = "$";
  DPGMM_ASSIGN_OR_RETURN(int64_t k, IntField(j, root, "k"));
  DPGMM_ASSIGN_OR_RETURN(int64_t d, IntField(j, root, "d"));
  DPGMM_ASSIGN_OR_RETURN(int64_t n, IntField(j, root, "n"));
  if (k < 1 || d < 1) return Mismatch(root, "k and d must be positive");
  DPGMM_ASSIGN_OR_RETURN(const Json* counts, Field(j, root, "counts"));
  GmmParams model;
  DPGMM_ASSIGN_OR_RETURN(model.weights, AsCounts(*counts, "$.counts"));
  if (model.weights.k() != k) return Mismatch("$.counts", "length differs from k");
  if (model.weights.total() != n) return Mismatch("$.counts", "sum differs from n");
  DPGMM_ASSIGN_OR_RETURN(const Json* comps, ArrayField(j, root, "components"));
  if (static_cast<int64_t>(comps->size()) != k) {
    return Mismatch("$.components", "length differs from k");
  }
  for (int c = 0; c < k; ++c) {
    const std::string path = absl::StrCat("$.components[", c, "]");
    DPGMM_ASSIGN_OR_RETURN(const Json* mean, Field((*comps)[c], path, "mean"));
    DPGMM_ASSIGN_OR_RETURN(Vector mu, AsVector(*mean, path + ".mean", d));
    DPGMM_ASSIGN_OR_RETURN(const Json* cov, Field((*comps)[c], path, "cov"));
    DPGMM_ASSIGN_OR_RETURN(Matrix sigma, AsMatrix(*cov, path + ".cov", d, d));
    model.means.push_back(std::move(mu));
    model.covs.emplace_back(sigma);
  }
  DPGMM_ASSIGN_OR_RETURN(model.regularization,
                         DoubleField(j, root, "regularization"));
  return model;
}

Json PlanToJson(const NoisePlan& plan) {
  Json j;
  j["epsilon"] = plan.epsilon;
  j["delta"] = plan.delta;
  j["lambda"] = plan.lambda;
  j["eps0"] = plan.eps0;
  j["adjacency"] = std::string(AdjacencyName(plan.mode.variant));
  j["clip_bound"] = plan.mode.clip_bound.has_value()
                        ? Json(*plan.mode.clip_bound)
                        : Json(nullptr);
  j["uniform_bound"] = plan.uniform_bound;
  Json classes = Json::array();
  for (const ClassNoise& c : plan.classes) {
    Json cj;
    cj["eps_k"] = c.eps_k;
    cj["gamma_k"] = c.gamma_k;
    cj["gamma_inv"] = MatrixJson(c.gamma_inv.matrix());
    classes.push_back(std::move(cj));
  }
  j["classes"] = std::move(classes);
  if (plan.transition.has_value()) {
    const TransitionPlan& tp = *plan.transition;
    Json t;
    Json support = Json::array();
    for (const WeightCounts& s : tp.support) support.push_back(CountsJson(s));
    t["support"] = std::move(support);
    t["j_star"] = tp.j_star;
    t["matrix"] = MatrixJson(tp.matrix);
    t["log_s_cardinality"] = tp.log_s_cardinality;
    j["transition"] = std::move(t);
  } else {
    j["transition"] = nullptr;
  }
  j["objective_trace"] = plan.objective_trace;
  j["iterations"] = plan.iterations;
  return j;
}

absl::StatusOr<NoisePlan> PlanFromJson(const Json& j) {
  const std::string root = "$";
  NoisePlan plan;
  DPGMM_ASSIGN_OR_RETURN(plan.epsilon, DoubleField(j, root, "epsilon"));
  DPGMM_ASSIGN_OR_RETURN(plan.delta, DoubleField(j, root, "delta"));
  DPGMM_ASSIGN_OR_RETURN(plan.lambda, DoubleField(j, root, "lambda"));
  DPGMM_ASSIGN_OR_RETURN(plan.eps0, DoubleField(j, root, "eps0"));
  DPGMM_ASSIGN_OR_RETURN(plan.mode, ModeFromJson(j, root));
  auto uniform = j.find("uniform_bound");
  plan.uniform_bound =
      uniform != j.end() && uniform->is_boolean() && uniform->get<bool>();
  DPGMM_ASSIGN_OR_RETURN(const Json* classes, ArrayField(j, root, "classes"));
  for (size_t c = 0; c < classes->size(); ++c) {
    const std::string path = absl::StrCat("$.classes[", c, "]");
    const Json& cj = (*classes)[c];
    ClassNoise noise;
    DPGMM_ASSIGN_OR_RETURN(noise.eps_k, DoubleField(cj, path, "eps_k"));
    DPGMM_ASSIGN_OR_RETURN(noise.gamma_k, DoubleField(cj, path, "gamma_k"));
    DPGMM_ASSIGN_OR_RETURN(const Json* gi, ArrayField(cj, path, "gamma_inv"));
    const int d = static_cast<int>(gi->size());
    DPGMM_ASSIGN_OR_RETURN(Matrix m, AsMatrix(*gi, path + ".gamma_inv", d, d));
    noise.gamma_inv = SymMatrix(m);
    plan.classes.push_back(std::move(noise));
  }
  DPGMM_ASSIGN_OR_RETURN(const Json* t, Field(j, root, "transition"));
  if (!t->is_null()) {
    const std::string path = "$.transition";
    TransitionPlan tp;
    DPGMM_ASSIGN_OR_RETURN(const Json* support, ArrayField(*t, path, "support"));
    for (size_t i = 0; i < support->size(); ++i) {
      DPGMM_ASSIGN_OR_RETURN(
          WeightCounts s,
          AsCounts((*support)[i], absl::StrCat(path, ".support[", i, "]")));
      tp.support.push_back(std::move(s));
    }
    if (tp.support.empty()) return Mismatch(path + ".support", "empty");
    DPGMM_ASSIGN_OR_RETURN(int64_t j_star, IntField(*t, path, "j_star"));
    if (j_star < 0 || j_star >= static_cast<int64_t>(tp.support.size())) {
      return Mismatch(path + ".j_star", "out of range");
    }
    tp.j_star = static_cast<int>(j_star);
    const int size = static_cast<int>(tp.support.size());
    DPGMM_ASSIGN_OR_RETURN(const Json* matrix, Field(*t, path, "matrix"));
    DPGMM_ASSIGN_OR_RETURN(tp.matrix,
                           AsMatrix(*matrix, path + ".matrix", size, size));
    DPGMM_ASSIGN_OR_RETURN(tp.log_s_cardinality,
                           DoubleField(*t, path, "log_s_cardinality"));
    tp.lambda = plan.lambda;
    plan.transition = std::move(tp);
  }
  DPGMM_ASSIGN_OR_RETURN(const Json* trace,
                         ArrayField(j, root, "objective_trace"));
  for (size_t i = 0; i < trace->size(); ++i) {
    DPGMM_ASSIGN_OR_RETURN(
        double v, AsDouble((*trace)[i], absl::StrCat("$.objective_trace[", i, "]")));
    plan.objective_trace.push_back(v);
  }
  DPGMM_ASSIGN_OR_RETURN(int64_t iterations, IntField(j, root, "iterations"));
  plan.iterations = static_cast<int>(iterations);
  return plan;
}

Json ReleasedToJson(const ReleasedGmm& released) {
  Json j = ModelToJson(released.params);
  Json meta;
  meta["epsilon"] = released.meta.epsilon;
  meta["delta"] = released.meta.delta;
  meta["epsilon0"] = released.meta.epsilon0;
  meta["lambda"] = released.meta.lambda;
  meta["seed"] = released.meta.seed;
  meta["adjacency"] = std::string(AdjacencyName(released.meta.adjacency));
  j["meta"] = std::move(meta);
  return j;
}

absl::StatusOr<ReleasedGmm> ReleasedFromJson(const Json& j) {
  ReleasedGmm out;
  DPGMM_ASSIGN_OR_RETURN(out.params, ModelFromJson(j));
  DPGMM_ASSIGN_OR_RETURN(const Json* meta, Field(j, "$", "meta"));
  const std::string path = "$.meta";
  DPGMM_ASSIGN_OR_RETURN(out.meta.epsilon, DoubleField(*meta, path, "epsilon"));
  DPGMM_ASSIGN_OR_RETURN(out.meta.delta, DoubleField(*meta, path, "delta"));
  DPGMM_ASSIGN_OR_RETURN(out.meta.epsilon0,
                         DoubleField(*meta, path, "epsilon0"));
  DPGMM_ASSIGN_OR_RETURN(out.meta.lambda, DoubleField(*meta, path, "lambda"));
  DPGMM_ASSIGN_OR_RETURN(const Json* seed, Field(*meta, path, "seed"));
  if (!seed->is_number_unsigned()) {
    return Mismatch(path + ".seed", "expected an unsigned integer");
  }
  out.meta.seed = seed->get<uint64_t>();
  DPGMM_ASSIGN_OR_RETURN(AdjacencyMode mode, ModeFromJson(*meta, path));
  out.meta.adjacency = mode.variant;
  return out;
}

Json KlReportToJson(const KlReport& report) {
  Json j;
  j["analytic_expected_kl"] = report.analytic_expected_kl;
  j["restricted_expected_kl"] = report.restricted_expected_kl;
  j["weight_term"] = report.weight_term;
  j["per_component_terms"] = report.per_component_terms;
  j["constant_term"] = report.constant_term;
  j["uniform_branch_g"] = report.uniform_branch_g;
  j["lambda"] = report.lambda;
  j["mc_estimate"] =
      report.mc_estimate.has_value() ? Json(*report.mc_estimate) : Json(nullptr);
  j["mc_stderr"] =
      report.mc_stderr.has_value() ? Json(*report.mc_stderr) : Json(nullptr);
  j["mc_trials"] =
      report.mc_trials.has_value() ? Json(*report.mc_trials) : Json(nullptr);
  return j;
}

Json LedgerToJson(const LedgerReport& report) {
  Json j;
  j["passed"] = report.passed();
  j["budget_ok"] = report.budget_ok;
  j["budget_margins"] = report.budget_margins;
  j["schur_ok"] = report.schur_ok;
  j["schur_margins"] = report.schur_margins;
  j["ratio_ok"] = report.ratio_ok;
  j["ratio_error"] = report.ratio_error;
  j["row_sum_error"] = report.row_sum_error;
  j["feature_ok"] = report.feature_ok;
  j["feature_margins"] = report.feature_margins;
  return j;
}

Json AuditToJson(const AuditReport& report) {
  Json j;
  j["passed"] = !report.hard_failure();
  j["strict"] = report.strict;
  if (report.weight.has_value()) {
    Json w;
    w["declared"] = report.weight->declared;
    w["raw_ratio"] = report.weight->raw_ratio;
    w["normalized_ratio"] = report.weight->normalized_ratio;
    j["weight_ratio"] = std::move(w);
  } else {
    j["weight_ratio"] = nullptr;
  }
  Json gaussian = Json::array();
  for (const GaussianClassAudit& g : report.gaussian) {
    Json gj;
    gj["worst_quadratic_form"] = g.worst_quadratic_form;
    gj["bound"] = g.bound;
    gj["margin"] = g.margin;
    gaussian.push_back(std::move(gj));
  }
  j["gaussian_margins"] = std::move(gaussian);
  j["wishart_budget_margins"] = report.wishart_budget_margins;
  if (report.frequency.has_value()) {
    const FrequencyAudit& f = *report.frequency;
    Json fj;
    fj["draws"] = f.draws;
    fj["observed"] = f.observed;
    fj["expected_probability"] = f.expected_probability;
    fj["statistic"] = f.statistic;
    fj["degrees_of_freedom"] = f.degrees_of_freedom;
    fj["critical_value"] = f.critical_value;
    fj["passed"] = f.passed;
    j["frequency_test"] = std::move(fj);
  } else {
    j["frequency_test"] = nullptr;
  }
  j["admissible_flips"] = report.admissible_flips;
  j["excluded_flips"] = report.excluded_flips;
  j["failures"] = report.failures;
  j["notes"] = report.notes;
  return j;
}

Json AdjacencySummaryToJson(const AdjacencySet& adj) {
  Json j;
  j["adjacency"] = std::string(AdjacencyName(adj.mode.variant));
  j["clip_bound"] = adj.mode.clip_bound.has_value()
                        ? Json(*adj.mode.clip_bound)
                        : Json(nullptr);
  j["uniform_bound"] = adj.uniform_bound;
  j["class_sizes"] = adj.class_sizes;
  std::vector<int64_t> constraint_counts;
  for (const auto& diffs : adj.mean_diffs) {
    constraint_counts.push_back(static_cast<int64_t>(diffs.size()));
  }
  j["constraints_per_class"] = constraint_counts;
  j["isotropic_radius"] = adj.isotropic_radius;
  j["weight_neighbors"] = static_cast<int64_t>(adj.weight_neighbors.size());
  j["admissible_flips"] = adj.admissible_flips;
  j["excluded_flips"] = adj.excluded_flips;
  return j;
}

std::string DumpJson(const Json& j) { return j.dump(2) + "\n"; }

absl::StatusOr<Json> ParseJson(const std::string& text) {
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return MakeError(ErrorCode::kParseError, "malformed JSON");
  }
  return j;
}

absl::StatusOr<Json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return MakeError(ErrorCode::kIoError, absl::StrCat("cannot open ", path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<Json> j = ParseJson(buffer.str());
  if (!j.ok()) {
    return MakeError(ErrorCode::kParseError,
                     absl::StrCat(path, ": malformed JSON"));
  }
  return j;
}

absl::Status WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return MakeError(ErrorCode::kIoError, absl::StrCat("cannot write ", path));
  }
  out << text;
  out.close();
  if (!out) {
    return MakeError(ErrorCode::kIoError, absl::StrCat("write failed: ", path));
  }
  return absl::OkStatus();
}

}  // namespace dpgmm
