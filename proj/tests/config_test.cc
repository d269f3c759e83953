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

#include "lqmftg/config.h"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lqmftg/error.h"

namespace lqmftg {
namespace {


const char kModel[] = R"(
[model]
A = 0.4
Abar = 0.4
B1 = 0.4
B1bar = 0.4
B2 = 0.3
B2bar = 0.3
Q = 0.4
Qbar = 0.4
R1 = 0.4
R1bar = 0.4
R2 = 0.4
R2bar = 0.4
gamma = 0.9
)";

std::string Minimal(const std::string& oracle = "exact") {
  return "[experiment]\nmethod = GDA\noracle = " + oracle + "\n" + kModel;
}

ErrorCode CodeOf(const std::string& text) {
  try {
    ParseConfig(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "config accepted";
  return ErrorCode::kInvalidArgument;
}

TEST(ConfigTest, ShippedGdaExact) {
  const ExperimentConfig cfg =
      LoadConfig(std::string(LQMFTG_CONFIG_DIR) + "/table1_gda_exact.cfg");
  EXPECT_EQ(cfg.optimizer.method, Method::kGda);
  EXPECT_EQ(cfg.optimizer.oracle, OracleKind::kExact);
  EXPECT_EQ(cfg.optimizer.T, 2000);
  EXPECT_EQ(cfg.optimizer.eta1, 0.1);
  EXPECT_EQ(cfg.optimizer.eta2, 0.1);
  EXPECT_EQ(cfg.optimizer.theta0.K1(0, 0), 0.0);
  EXPECT_EQ(cfg.optimizer.theta0.L2(0, 0), 0.0);
  const ModelParams ref = ReferenceParams();
  EXPECT_EQ(cfg.model.A, ref.A);
  EXPECT_EQ(cfg.model.B2bar, ref.B2bar);
  EXPECT_EQ(cfg.model.gamma, ref.gamma);
  EXPECT_EQ(cfg.model.noise.init_common, ref.noise.init_common);
  EXPECT_EQ(cfg.model.noise.step_idio, ref.noise.step_idio);
}

TEST(ConfigTest, ShippedSampledConfigs) {
  for (const char* name : {"table1_gda_sampled.cfg", "table1_ag_sampled.cfg"}) {
    const ExperimentConfig cfg =
        LoadConfig(std::string(LQMFTG_CONFIG_DIR) + "/" + name);
    EXPECT_TRUE(cfg.has_estimator);
    EXPECT_EQ(cfg.repeats, 5);
    EXPECT_EQ(cfg.optimizer.estimator.perturbations, 10000);
    EXPECT_EQ(cfg.optimizer.estimator.horizon, 50);
    EXPECT_EQ(cfg.optimizer.estimator.radius, 0.1);
  }
  const ExperimentConfig ag =
      LoadConfig(std::string(LQMFTG_CONFIG_DIR) + "/table1_ag_exact.cfg");
  EXPECT_EQ(ag.optimizer.method, Method::kAg);
  EXPECT_EQ(ag.optimizer.T1, 10);
  EXPECT_EQ(ag.optimizer.T2, 200);
}

TEST(ConfigTest, DefaultsFollowReferenceSetting) {
  const ExperimentConfig cfg = ParseConfig(Minimal());
  EXPECT_EQ(cfg.optimizer.T1, 10);
  EXPECT_EQ(cfg.optimizer.T2, 200);
  EXPECT_EQ(cfg.optimizer.T, 2000);
  EXPECT_EQ(cfg.optimizer.eta1, 0.1);
  EXPECT_EQ(cfg.optimizer.estimator.perturbations, 10000);
  EXPECT_EQ(cfg.model.noise.init_idio, Distribution::Uniform(-1.0, 1.0));
  EXPECT_EQ(cfg.model.noise.step_common, Distribution::Gaussian(0.0, 0.01));
  EXPECT_EQ(cfg.repeats, 1);
}

TEST(ConfigTest, SampledWithoutEstimatorIsCrossFieldError) {
  EXPECT_EQ(CodeOf(Minimal("sampled")), ErrorCode::kCrossFieldError);
  EXPECT_NO_THROW(ParseConfig(Minimal("sampled") + "[estimator]\nradius = 0.2\n"));
  ConfigOverrides overrides;
  overrides.oracle = OracleKind::kSampled;
  EXPECT_THROW(ParseConfig(Minimal(), overrides), Error);
}

TEST(ConfigTest, ExactOracleIgnoresEstimator) {
  const ExperimentConfig cfg =
      ParseConfig(Minimal() + "[estimator]\nperturbations = 7\n");
  EXPECT_EQ(cfg.optimizer.oracle, OracleKind::kExact);
}

TEST(ConfigTest, DiscountOfOneIsSchemaError) {
  std::string text = Minimal();
  text.replace(text.find("gamma = 0.9"), 11, "gamma = 1.0");
  EXPECT_EQ(CodeOf(text), ErrorCode::kSchemaError);
}

TEST(ConfigTest, MissingAndUnknownFields) {
  std::string text = Minimal();
  text.erase(text.find("Q = 0.4\n"), 8);
  EXPECT_EQ(CodeOf(text), ErrorCode::kSchemaError);
  EXPECT_EQ(CodeOf(Minimal() + "[optimizer]\nlearning_rate = 1\n"),
            ErrorCode::kSchemaError);
  EXPECT_EQ(CodeOf(Minimal() + "[plots]\n"), ErrorCode::kSchemaError);
  EXPECT_EQ(CodeOf(std::string(kModel)), ErrorCode::kSchemaError);
}

TEST(ConfigTest, ParseErrorsCarryLineNumbers) {
  try {
    ParseConfig(Minimal() + "[optimizer]\nT = many\n");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("optimizer.T (line"), std::string::npos);
  }
  try {
    ParseConfig("[experiment]\nmethod GDA\n");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(CodeOf(Minimal() + "[optimizer]\nT = 5\nT = 6\n"),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf(Minimal() + "[noise]\ninit_idio = cauchy(0, 1)\n"),
            ErrorCode::kParseError);
}

TEST(ConfigTest, MatrixSyntax) {
  const Matrix m = ParseMatrix("1 2, 3; 4 5 6");
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 3);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(ParseMatrix(FormatMatrix(m)), m);
  const Matrix tricky = Matrix::Constant(1, 1, 0.1 + 0.2);
  EXPECT_EQ(ParseMatrix(FormatMatrix(tricky)), tricky);
  EXPECT_THROW(ParseMatrix("1 2; 3"), Error);
  EXPECT_THROW(ParseMatrix("1 x"), Error);
}

TEST(ConfigTest, TwoDimensionalModel) {
  const std::string text = R"(
[experiment]
method = AG
oracle = exact
[model]
state_dim = 2
control_dim = 1
A = 0.4 0; 0 0.3
Abar = 0 0; 0 0
B1 = 1; 0
B1bar = 0; 0
B2 = 0; 1
B2bar = 0; 0
Q = 1 0; 0 1
Qbar = 0 0; 0 0
R1 = 1
R1bar = 0
R2 = 2
R2bar = 0
gamma = 0.5
[optimizer]
theta0_K1 = 0.1 0.2
)";
  const ExperimentConfig cfg = ParseConfig(text);
  EXPECT_EQ(cfg.model.A(1, 1), 0.3);
  EXPECT_EQ(cfg.optimizer.theta0.K1(0, 1), 0.2);
  EXPECT_EQ(cfg.optimizer.theta0.K2.cols(), 2);

  std::string bad = text;
  bad.replace(bad.find("B1 = 1; 0"), 9, "B1 = 1 0");
  EXPECT_EQ(CodeOf(bad), ErrorCode::kSchemaError);
}

TEST(ConfigTest, Overrides) {
  ConfigOverrides overrides;
  overrides.seed = 99;
  overrides.output_dir = "elsewhere";
  overrides.repeats = 3;
  const ExperimentConfig cfg = ParseConfig(Minimal(), overrides);
  EXPECT_EQ(cfg.master_seed, 99u);
  EXPECT_EQ(cfg.output_dir, "elsewhere");
  EXPECT_EQ(cfg.repeats, 3);
}

TEST(ConfigTest, ValidationSection) {
  const ExperimentConfig cfg = ParseConfig(
      Minimal() + "[validation]\nNs = 5, 50\nsamples = 10\npolicy = theta0\n");
  EXPECT_EQ(cfg.validation.Ns, (std::vector<int>{5, 50}));
  EXPECT_EQ(cfg.validation.samples, 10);
  EXPECT_EQ(cfg.validation.policy, PolicyChoice::kTheta0);
  EXPECT_EQ(CodeOf(Minimal() + "[validation]\nNs = 0\n"), ErrorCode::kSchemaError);
}

TEST(ConfigTest, MissingFileIsIoError) {
  try {
    LoadConfig("/nonexistent/config.cfg");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

}  // namespace
}  // namespace lqmftg
