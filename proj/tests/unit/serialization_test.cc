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

#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "dpgmm/planner.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpgmm {
namespace {

using ::dpgmm::testing::RandomDataset;
using ::dpgmm::testing::RandomSpd;
using ::dpgmm::testing::RandomVector;
using ::testing::HasSubstr;

bool SameBits(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool SameBits(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!SameBits(a.data()[i], b.data()[i])) return false;
  }
  return true;
}

GmmParams RandomModel(int k, int d, std::mt19937_64& gen) {
  GmmParams m;
  std::vector<int64_t> counts;
  for (int c = 0; c < k; ++c) counts.push_back(3 + 7 * c);
  m.weights = WeightCounts::Create(counts).value();
  for (int c = 0; c < k; ++c) {
    m.means.push_back(RandomVector(d, gen, 1e3));
    m.covs.push_back(RandomSpd(d, gen, 1e-7));
  }
  m.regularization = 1.0 / 3.0;
  return m;
}

template <typename T>
T RoundTrip(const Json& j,
            absl::StatusOr<T> (*from)(const Json&)) {
  absl::StatusOr<Json> parsed = ParseJson(DumpJson(j));
  EXPECT_TRUE(parsed.ok());
  absl::StatusOr<T> out = from(*parsed);
  EXPECT_TRUE(out.ok()) << out.status();
  return *std::move(out);
}

TEST(JsonDoubleTest, ShortestFormRoundTripsBitForBit) {
  std::mt19937_64 gen(110);
  std::vector<double> values = {0.1,
                                1.0 / 3.0,
                                -0.0,
                                std::numeric_limits<double>::min(),
                                std::numeric_limits<double>::denorm_min(),
                                std::numeric_limits<double>::max(),
                                std::numeric_limits<double>::epsilon()};
  std::uniform_int_distribution<uint64_t> bits;
  while (values.size() < 5000) {
    const uint64_t b = bits(gen);
    double v;
    std::memcpy(&v, &b, sizeof(v));
    if (std::isfinite(v)) values.push_back(v);
  }
  for (double v : values) {
    const Json j = Json::array({v});
    DPGMM_ASSERT_OK_AND_ASSIGN(Json back, ParseJson(DumpJson(j)));
    EXPECT_TRUE(SameBits(back[0].get<double>(), v)) << v;
  }
}

TEST(ModelJsonTest, RoundTripIsExact) {
  std::mt19937_64 gen(111);
  for (int trial = 0; trial < 20; ++trial) {
    const GmmParams m = RandomModel(1 + trial % 4, 1 + trial % 5, gen);
    const GmmParams back = RoundTrip(ModelToJson(m), &ModelFromJson);
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_TRUE(SameBits(back.regularization, m.regularization));
    for (int c = 0; c < m.k(); ++c) {
      EXPECT_TRUE(SameBits(back.means[c], m.means[c]));
      EXPECT_TRUE(SameBits(back.covs[c].matrix(), m.covs[c].matrix()));
    }
    EXPECT_EQ(DumpJson(ModelToJson(back)), DumpJson(ModelToJson(m)));
  }
}

TEST(ModelJsonTest, ErrorsNameTheOffendingPath) {
  std::mt19937_64 gen(112);
  const Json good = ModelToJson(RandomModel(2, 2, gen));

  Json j = good;
  j["components"][1].erase("cov");
  absl::StatusOr<GmmParams> m = ModelFromJson(j);
  EXPECT_EQ(ErrorCodeOf(m), ErrorCode::kSchemaMismatch);
  EXPECT_THAT(std::string(m.status().message()),
              HasSubstr("$.components[1].cov"));

  j = good;
  j["components"][0]["mean"][1] = "x";
  m = ModelFromJson(j);
  EXPECT_THAT(std::string(m.status().message()),
              HasSubstr("$.components[0].mean[1]"));

  j = good;
  j["n"] = 999;
  m = ModelFromJson(j);
  EXPECT_THAT(std::string(m.status().message()), HasSubstr("$.counts"));

  j = good;
  j["k"] = 1.5;
  m = ModelFromJson(j);
  EXPECT_THAT(std::string(m.status().message()), HasSubstr("$.k"));

  j = good;
  j["components"][1]["cov"][0] = Json::array({1.0});
  m = ModelFromJson(j);
  EXPECT_THAT(std::string(m.status().message()),
              HasSubstr("$.components[1].cov[0]"));
}

TEST(PlanJsonTest, RoundTripIsExact) {
  std::mt19937_64 gen(113);
  const LabeledDataset data = RandomDataset(3, 2, 60, gen);
  const GmmParams fit = FitGmm(data).value();
  const AdjacencySet adj = EnumerateLabelFlip(data, fit);
  const PrivacySpec spec = PrivacySpec::Create(1.0, 1e-5, 1e-3, {}).value();
  DPGMM_ASSERT_OK_AND_ASSIGN(NoisePlan plan, Plan(fit, adj, spec));
  const NoisePlan back = RoundTrip(PlanToJson(plan), &PlanFromJson);
  EXPECT_TRUE(SameBits(back.eps0, plan.eps0));
  EXPECT_EQ(back.mode.variant, plan.mode.variant);
  ASSERT_EQ(back.k(), plan.k());
  for (int c = 0; c < plan.k(); ++c) {
    EXPECT_TRUE(SameBits(back.classes[c].eps_k, plan.classes[c].eps_k));
    EXPECT_TRUE(SameBits(back.classes[c].gamma_k, plan.classes[c].gamma_k));
    EXPECT_TRUE(SameBits(back.classes[c].gamma_inv.matrix(),
                         plan.classes[c].gamma_inv.matrix()));
  }
  ASSERT_TRUE(back.transition.has_value());
  EXPECT_EQ(back.transition->support, plan.transition->support);
  EXPECT_TRUE(SameBits(back.transition->matrix, plan.transition->matrix));
  EXPECT_EQ(back.transition->lambda, plan.transition->lambda);
  EXPECT_EQ(back.objective_trace, plan.objective_trace);
  EXPECT_EQ(back.iterations, plan.iterations);
  EXPECT_EQ(DumpJson(PlanToJson(back)), DumpJson(PlanToJson(plan)));

  DPGMM_ASSERT_OK_AND_ASSIGN(LedgerReport ledger,
                             VerifyLedger(back, adj, spec));
  EXPECT_TRUE(ledger.passed());
}

TEST(PlanJsonTest, FeaturePlanKeepsClipBoundAndNullTransition) {
  NoisePlan plan;
  plan.epsilon = 1.0;
  plan.delta = 1e-6;
  plan.mode =
      AdjacencyMode::Create(AdjacencyVariant::kFeatureChange, 0.75).value();
  plan.uniform_bound = true;
  plan.classes.push_back(ClassNoise{0.5, 2.0, SymMatrix::Identity(2) * 0.1});
  const Json j = PlanToJson(plan);
  EXPECT_TRUE(j["transition"].is_null());
  const NoisePlan back = RoundTrip(j, &PlanFromJson);
  EXPECT_FALSE(back.transition.has_value());
  ASSERT_TRUE(back.mode.clip_bound.has_value());
  EXPECT_EQ(*back.mode.clip_bound, 0.75);
  EXPECT_TRUE(back.uniform_bound);
}

TEST(PlanJsonTest, ErrorsNameTheOffendingPath) {
  std::mt19937_64 gen(114);
  const LabeledDataset data = RandomDataset(2, 2, 30, gen);
  const GmmParams fit = FitGmm(data).value();
  const AdjacencySet adj = EnumerateLabelFlip(data, fit);
  const PrivacySpec spec = PrivacySpec::Create(1.0, 1e-5, 1e-3, {}).value();
  const Json good = PlanToJson(Plan(fit, adj, spec).value());

  Json j = good;
  j["transition"]["j_star"] = 99;
  absl::StatusOr<NoisePlan> p = PlanFromJson(j);
  EXPECT_EQ(ErrorCodeOf(p), ErrorCode::kSchemaMismatch);
  EXPECT_THAT(std::string(p.status().message()),
              HasSubstr("$.transition.j_star"));

  j = good;
  j["classes"][1].erase("gamma_k");
  p = PlanFromJson(j);
  EXPECT_THAT(std::string(p.status().message()),
              HasSubstr("$.classes[1].gamma_k"));

  j = good;
  j["adjacency"] = "nearby";
  p = PlanFromJson(j);
  EXPECT_THAT(std::string(p.status().message()), HasSubstr("$.adjacency"));

  j = good;
  j["transition"]["support"][2][0] = 0;
  p = PlanFromJson(j);
  EXPECT_THAT(std::string(p.status().message()),
              HasSubstr("$.transition.support[2]"));
}

TEST(ReleasedJsonTest, RoundTripKeepsMetadata) {
  std::mt19937_64 gen(115);
  ReleasedGmm r;
  r.params = RandomModel(3, 2, gen);
  r.meta.epsilon = 2.0;
  r.meta.delta = 1e-7;
  r.meta.epsilon0 = 0.123456789;
  r.meta.lambda = 1e-3;
  r.meta.seed = 18446744073709551557ull;
  r.meta.adjacency = AdjacencyVariant::kRemoveOne;
  const ReleasedGmm back = RoundTrip(ReleasedToJson(r), &ReleasedFromJson);
  EXPECT_EQ(back.meta.seed, r.meta.seed);
  EXPECT_EQ(back.meta.adjacency, AdjacencyVariant::kRemoveOne);
  EXPECT_TRUE(SameBits(back.meta.epsilon0, r.meta.epsilon0));
  EXPECT_EQ(back.params.weights, r.params.weights);

  Json j = ReleasedToJson(r);
  j["meta"]["seed"] = -4;
  EXPECT_THAT(std::string(ReleasedFromJson(j).status().message()),
              HasSubstr("$.meta.seed"));
}

TEST(ParseJsonTest, MalformedTextIsAParseError) {
  EXPECT_EQ(ErrorCodeOf(ParseJson("{\"k\": ")), ErrorCode::kParseError);
}

TEST(FileIoTest, WriteThenReadAndMissingFile) {
  const std::string dir = ::testing::TempDir();
  const std::string path = dir + "/serialization_test.json";
  ASSERT_TRUE(WriteTextFile(path, DumpJson(Json{{"a", 1}})).ok());
  DPGMM_ASSERT_OK_AND_ASSIGN(Json j, ReadJsonFile(path));
  EXPECT_EQ(j["a"], 1);
  EXPECT_EQ(ErrorCodeOf(ReadJsonFile(dir + "/does_not_exist.json")),
            ErrorCode::kIoError);
  EXPECT_EQ(ErrorCodeOf(WriteTextFile(dir + "/no/such/dir/x.json", "")),
            ErrorCode::kIoError);
  std::filesystem::remove(path);
}

TEST(DumpJsonTest, TwoSpaceIndentAndTrailingNewline) {
  EXPECT_EQ(DumpJson(Json{{"a", 1}}), "{\n  \"a\": 1\n}\n");
}

}  // namespace
}  // namespace dpgmm
