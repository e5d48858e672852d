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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpgmm {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

SweepSpec SmallSpec(SweepVariable variable, std::vector<double> grid) {
  SweepSpec spec;
  spec.variable = variable;
  spec.grid = std::move(grid);
  spec.trials = 3;
  spec.base.k = 3;
  spec.base.d = 2;
  spec.base.n = 150;
  spec.seed = 17;
  return spec;
}

TEST(GenerateSyntheticTest, ShapesAndClassFloor) {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    const int k = 1 + seed % 8;
    const int d = 1 + seed % 4;
    const int64_t n = 2 * k + seed;
    DPGMM_ASSERT_OK_AND_ASSIGN(SyntheticData s,
                               GenerateSynthetic(k, d, n, seed));
    EXPECT_EQ(s.data.n(), n);
    EXPECT_EQ(s.data.d(), d);
    EXPECT_EQ(s.truth.k(), k);
    EXPECT_EQ(s.truth.weights.counts, s.data.class_sizes());
    for (int64_t size : s.data.class_sizes()) EXPECT_GE(size, 2);
    for (int c = 0; c < k; ++c) {
      EXPECT_LE(s.truth.means[c].cwiseAbs().maxCoeff(), 10.0);
    }
  }
}

TEST(GenerateSyntheticTest, SeedDeterminesTheData) {
  DPGMM_ASSERT_OK_AND_ASSIGN(SyntheticData a, GenerateSynthetic(4, 3, 200, 5));
  DPGMM_ASSERT_OK_AND_ASSIGN(SyntheticData b, GenerateSynthetic(4, 3, 200, 5));
  DPGMM_ASSERT_OK_AND_ASSIGN(SyntheticData c, GenerateSynthetic(4, 3, 200, 6));
  EXPECT_EQ(a.data.points(), b.data.points());
  EXPECT_EQ(a.data.labels(), b.data.labels());
  EXPECT_NE(a.data.points(), c.data.points());
}

TEST(GenerateSyntheticTest, RejectsTooFewPoints) {
  EXPECT_EQ(ErrorCodeOf(GenerateSynthetic(3, 2, 5, 0)),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(ErrorCodeOf(GenerateSynthetic(0, 2, 5, 0)),
            ErrorCode::kInvalidArgument);
}

TEST(SweepVariableTest, NamesRoundTrip) {
  for (SweepVariable v : {SweepVariable::kEpsilon, SweepVariable::kN,
                          SweepVariable::kK, SweepVariable::kD,
                          SweepVariable::kClip}) {
    DPGMM_ASSERT_OK_AND_ASSIGN(SweepVariable back,
                               ParseSweepVariable(SweepVariableName(v)));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(ErrorCodeOf(ParseSweepVariable("delta")),
            ErrorCode::kInvalidArgument);
}

TEST(RunSweepTest, ValidatesTheSpec) {
  SweepSpec spec = SmallSpec(SweepVariable::kEpsilon, {});
  EXPECT_EQ(ErrorCodeOf(RunSweep(spec)), ErrorCode::kInvalidArgument);
  spec = SmallSpec(SweepVariable::kD, {2, 7});
  spec.d_cap = 6;
  absl::StatusOr<SweepResult> r = RunSweep(spec);
  EXPECT_EQ(ErrorCodeOf(r), ErrorCode::kInvalidArgument);
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("cap"));
}

TEST(RunSweepTest, EpsilonSweepIsDeterministicAndShared) {
  const SweepSpec spec = SmallSpec(SweepVariable::kEpsilon, {0.5, 1.0, 4.0});
  DPGMM_ASSERT_OK_AND_ASSIGN(SweepResult a, RunSweep(spec));
  DPGMM_ASSERT_OK_AND_ASSIGN(SweepResult b, RunSweep(spec));
  ASSERT_EQ(a.rows.size(), 9u);
  EXPECT_TRUE(a.failures.empty());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].kl, b.rows[i].kl);
    EXPECT_GT(a.rows[i].kl, 0.0);
  }
  // Each trial sees the same dataset at every epsilon, so per trial the
  // expected KL falls as epsilon grows.
  for (int trial = 0; trial < 3; ++trial) {
    EXPECT_GT(a.rows[trial].kl, a.rows[3 + trial].kl);
    EXPECT_GT(a.rows[3 + trial].kl, a.rows[6 + trial].kl);
  }
  ASSERT_EQ(a.summary.size(), 3u);
  for (int vi = 0; vi < 3; ++vi) {
    const SweepSummaryRow& s = a.summary[vi];
    EXPECT_EQ(s.count, 3);
    double mean = 0.0;
    for (int t = 0; t < 3; ++t) mean += a.rows[3 * vi + t].kl / 3.0;
    EXPECT_NEAR(s.mean, mean, 1e-12 * mean);
    EXPECT_GT(s.half_width, 0.0);
  }
}

TEST(RunSweepTest, ClipSweepUsesFeatureChanges) {
  const SweepSpec spec = SmallSpec(SweepVariable::kClip, {0.5, 4.0});
  DPGMM_ASSERT_OK_AND_ASSIGN(SweepResult r, RunSweep(spec));
  ASSERT_EQ(r.rows.size(), 6u);
  for (const SweepRow& row : r.rows) EXPECT_LE(row.iterations, 2);
  for (int trial = 0; trial < 3; ++trial) {
    EXPECT_GT(r.rows[trial].kl, r.rows[3 + trial].kl);
  }
}

TEST(WriteSweepTest, WritesThreeTables) {
  const SweepSpec spec = SmallSpec(SweepVariable::kN, {100, 200});
  DPGMM_ASSERT_OK_AND_ASSIGN(SweepResult r, RunSweep(spec));
  r.failures.push_back(SweepFailure{300, 1, "bad, worse\nworst"});
  const std::filesystem::path dir =
      std::filesystem::path(::testing::TempDir()) / "sweep_out";
  std::filesystem::remove_all(dir);
  ASSERT_TRUE(WriteSweep(r, dir.string()).ok());

  const std::string raw = Slurp(dir / "raw.csv");
  EXPECT_THAT(raw, StartsWith("variable,value,trial,kl\nn,100,0,"));
  EXPECT_EQ(std::count(raw.begin(), raw.end(), '\n'), 7);
  const std::string summary = Slurp(dir / "summary.csv");
  EXPECT_THAT(summary,
              StartsWith("variable,value,count,mean,half_width\nn,100,3,"));
  EXPECT_EQ(Slurp(dir / "failures.csv"),
            "variable,value,trial,message\nn,300,1,bad; worse;worst\n");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dpgmm
