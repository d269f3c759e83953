// Copyright 2026 The lqmftg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lqmftg/optimizers.h"

#include <sstream>

#include <gtest/gtest.h>

#include "lqmftg/error.h"
#include "lqmftg/riccati.h"
#include "lqmftg/value.h"
#include "oracles.h"

namespace lqmftg {
namespace {

using testing::ScalarPolicy;

class OptimizerTest : public ::testing::Test {
 protected:
  OptimizerTest()
      : model_(ReferenceParams()), star_(NashPolicy(model_, SolveRiccati(model_))) {}

  static OptimizerConfig Gda() {
    OptimizerConfig cfg;
    cfg.method = Method::kGda;
    cfg.T = 2000;
    return cfg;
  }

  static OptimizerConfig Ag() {
    OptimizerConfig cfg;
    cfg.method = Method::kAg;
    cfg.T1 = 10;
    cfg.T2 = 200;
    return cfg;
  }

  static std::string Csv(const RunLog& log) {
    std::ostringstream out;
    WriteRunLogCsv(log, out);
    return out.str();
  }

  void ExpectNear(const PolicyPair& a, const PolicyPair& b, double tol) {
    EXPECT_NEAR(a.K1(0, 0), b.K1(0, 0), tol);
    EXPECT_NEAR(a.L1(0, 0), b.L1(0, 0), tol);
    EXPECT_NEAR(a.K2(0, 0), b.K2(0, 0), tol);
    EXPECT_NEAR(a.L2(0, 0), b.L2(0, 0), tol);
  }

  Model model_;
  PolicyPair star_;
};

TEST(RelativeErrorTest, Examples) {
  EXPECT_EQ(RelativeError(1.0, 1.0), 0.0);
  EXPECT_NEAR(RelativeError(1.1, 1.0), 0.1, 1e-15);
  EXPECT_NEAR(RelativeError(-0.9, -1.0), 0.1, 1e-15);
  try {
    RelativeError(1.0, 0.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBenchmarkZero);
  }
}

TEST_F(OptimizerTest, GdaConvergesWithExactGradients) {
  const RunLog log = RunGda(model_, Gda(), star_);
  EXPECT_EQ(log.termination, Termination::kCompleted);
  EXPECT_EQ(log.iterations, 2000);
  ASSERT_EQ(log.records.size(), 2001u);
  EXPECT_LE(log.records.back().rel_err, 1e-3);
  EXPECT_LE(log.records.back().rel_err, log.records.front().rel_err);
  ExpectNear(log.final_theta, star_, 1e-3);
  const double initial = RelativeError(ExactUtility(model_, PolicyPair::Zero(1, 1)).C,
                                       ExactUtility(model_, star_).C);
  EXPECT_GT(initial, 0.0);
  EXPECT_EQ(log.records.front().rel_err, initial);
}

TEST_F(OptimizerTest, AgConvergesWithExactGradients) {
  const RunLog log = RunAg(model_, Ag(), star_);
  EXPECT_EQ(log.termination, Termination::kCompleted);
  EXPECT_EQ(log.iterations, 2000);
  EXPECT_LE(log.records.back().rel_err, 1e-3);
  ExpectNear(log.final_theta, star_, 1e-3);
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    EXPECT_EQ(log.records[i].k, log.records[i - 1].k + 1);
  }
}

TEST_F(OptimizerTest, AgPlayerTwoMovesEveryInnerLoop) {
  OptimizerConfig cfg = Ag();
  cfg.T2 = 3;
  const RunLog log = RunAg(model_, cfg, star_);
  ASSERT_EQ(log.records.size(), 31u);
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    const bool moved = log.records[i].theta.K2 != log.records[i - 1].theta.K2;
    EXPECT_EQ(moved, log.records[i].k % 10 == 0) << "k = " << log.records[i].k;
    EXPECT_NE(log.records[i].theta.K1, log.records[i - 1].theta.K1);
  }
}

TEST_F(OptimizerTest, ZeroStepKeepsParametersFixed) {
  for (OptimizerConfig cfg : {Ag(), Gda()}) {
    cfg.eta1 = cfg.eta2 = 0.0;
    cfg.T2 = 5;
    cfg.T = 50;
    cfg.theta0 = ScalarPolicy(0.1, 0.2, 0.3, 0.4);
    const RunLog log = RunOptimizer(model_, cfg, star_);
    ASSERT_EQ(log.records.size(), 51u);
    for (const IterationRecord& r : log.records) {
      EXPECT_EQ(r.theta.K1, cfg.theta0.K1);
      EXPECT_EQ(r.theta.L2, cfg.theta0.L2);
      EXPECT_EQ(r.rel_err, log.records.front().rel_err);
    }
  }
}

TEST_F(OptimizerTest, EquilibriumIsAFixedPoint) {
  for (OptimizerConfig cfg : {Ag(), Gda()}) {
    cfg.theta0 = star_;
    const RunLog log = RunOptimizer(model_, cfg, star_);
    for (const IterationRecord& r : log.records) ExpectNear(r.theta, star_, 1e-8);
  }
}

TEST_F(OptimizerTest, OneGdaStepFromZero) {
  OptimizerConfig cfg = Gda();
  cfg.T = 1;
  const RunLog log = RunGda(model_, cfg, star_);
  const GradientPair g = ExactGradient(model_, PolicyPair::Zero(1, 1));
  const PolicyPair& t = log.final_theta;
  EXPECT_EQ(t.K1(0, 0), -0.1 * g.gK1(0, 0));
  EXPECT_EQ(t.L1(0, 0), -0.1 * g.gL1(0, 0));
  EXPECT_EQ(t.K2(0, 0), 0.1 * g.gK2(0, 0));
  EXPECT_EQ(t.L2(0, 0), 0.1 * g.gL2(0, 0));
}

TEST_F(OptimizerTest, GdaUpdateOrderIsIrrelevant) {
  for (OracleKind oracle : {OracleKind::kExact, OracleKind::kSampled}) {
    OptimizerConfig cfg = Gda();
    cfg.T = oracle == OracleKind::kExact ? 200 : 5;
    cfg.oracle = oracle;
    cfg.estimator.perturbations = 200;
    const RunLog a = RunGda(model_, cfg, star_, 9);
    cfg.gda_player2_first = true;
    const RunLog b = RunGda(model_, cfg, star_, 9);
    EXPECT_EQ(Csv(a), Csv(b));
  }
}

TEST_F(OptimizerTest, AgWithFrozenPlayerTwoDescends) {
  OptimizerConfig cfg = Ag();
  cfg.eta1 = 0.01;
  cfg.eta2 = 0.0;
  cfg.T2 = 50;
  const RunLog log = RunAg(model_, cfg, star_);
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    EXPECT_LE(log.records[i].C, log.records[i - 1].C);
    EXPECT_EQ(log.records[i].theta.K2, log.records[0].theta.K2);
    EXPECT_EQ(log.records[i].theta.L2, log.records[0].theta.L2);
  }
}

TEST_F(OptimizerTest, HaltsWhenLeavingStabilizingSet) {
  OptimizerConfig cfg = Gda();
  cfg.eta1 = cfg.eta2 = 50.0;
  const RunLog log = RunGda(model_, cfg, star_);
  EXPECT_EQ(log.termination, Termination::kLeftStabilizingSet);
  EXPECT_EQ(log.iterations, 0);
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_FALSE(log.diagnostic.empty());

  cfg.shrink_on_exit = true;
  cfg.T = 1;
  const RunLog shrunk = RunGda(model_, cfg, star_);
  EXPECT_EQ(shrunk.termination, Termination::kCompleted);
  EXPECT_TRUE(InStabilizingSet(model_, shrunk.final_theta));
  EXPECT_NE(shrunk.final_theta.L1, PolicyPair::Zero(1, 1).L1);
}

TEST_F(OptimizerTest, HaltsOnNonFiniteParameters) {
  OptimizerConfig cfg = Gda();
  cfg.oracle = OracleKind::kSampled;
  cfg.estimator.perturbations = 10;
  cfg.eta1 = cfg.eta2 = 1e308;
  cfg.T = 3;
  const RunLog log = RunGda(model_, cfg, star_);
  EXPECT_EQ(log.termination, Termination::kNonFinite);
  EXPECT_EQ(log.iterations, 0);
}

TEST_F(OptimizerTest, SampledRunsAreSeeded) {
  OptimizerConfig cfg = Gda();
  cfg.oracle = OracleKind::kSampled;
  cfg.estimator.perturbations = 100;
  cfg.T = 10;
  EXPECT_EQ(Csv(RunGda(model_, cfg, star_, 1)), Csv(RunGda(model_, cfg, star_, 1)));
  EXPECT_NE(Csv(RunGda(model_, cfg, star_, 1)), Csv(RunGda(model_, cfg, star_, 2)));
}

TEST_F(OptimizerTest, LogEveryThinsRecords) {
  OptimizerConfig cfg = Gda();
  cfg.T = 95;
  cfg.log_every = 10;
  const RunLog log = RunGda(model_, cfg, star_);
  ASSERT_EQ(log.records.size(), 11u);
  EXPECT_EQ(log.records[9].k, 90);
  EXPECT_EQ(log.records.back().k, 95);
}

TEST_F(OptimizerTest, NoBenchmarkMeansNoRelativeError) {
  OptimizerConfig cfg = Gda();
  cfg.T = 3;
  const RunLog log = RunGda(model_, cfg, std::nullopt);
  EXPECT_TRUE(std::isnan(log.records.back().rel_err));
  EXPECT_FALSE(std::isnan(log.records.back().C));
}

TEST_F(OptimizerTest, CsvLayout) {
  OptimizerConfig cfg = Gda();
  cfg.T = 1;
  const std::string csv = Csv(RunGda(model_, cfg, star_));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "k,K1,L1,K2,L2,C,gradnorm_K1,gradnorm_L1,gradnorm_K2,gradnorm_L2,"
            "rel_err");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(OptimizerTest, RejectsInvalidConfig) {
  OptimizerConfig cfg = Gda();
  cfg.T = 0;
  EXPECT_THROW(RunGda(model_, cfg, star_), Error);
  cfg = Gda();
  cfg.eta1 = -0.1;
  EXPECT_THROW(RunGda(model_, cfg, star_), Error);
}

}  // namespace
}  // namespace lqmftg
