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

#include "lqmftg/model.h"

#include <random>

#include <gtest/gtest.h>

#include "lqmftg/error.h"
#include "oracles.h"

namespace lqmftg {
namespace {

using testing::Scalar;
using testing::ScalarPolicy;

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lqmftg::Error thrown";
  return ErrorCode::kInvalidArgument;
}

// A random well-posed model of the given size.
ModelParams RandomParams(int d, int l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto random = [&](int r, int c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  const auto spd = [&](int n) {
    const Matrix m = random(n, n);
    return Matrix(m * m.transpose() + Matrix::Identity(n, n));
  };
  ModelParams p;
  p.state_dim = d;
  p.control_dim = l;
  p.A = random(d, d);
  p.Abar = random(d, d);
  p.B1 = random(d, l);
  p.B1bar = random(d, l);
  p.B2 = random(d, l);
  p.B2bar = random(d, l);
  p.Q = spd(d);
  p.Qbar = spd(d);
  p.R1 = spd(l);
  p.R1bar = spd(l);
  p.R2 = spd(l);
  p.R2bar = spd(l);
  p.gamma = 0.9;
  return p;
}

TEST(ModelTest, ReferenceDerivedQuantities) {
  const Model model(ReferenceParams());
  const DerivedParams& q = model.derived();
  EXPECT_DOUBLE_EQ(q.Atil(0, 0), 0.8);
  EXPECT_DOUBLE_EQ(q.Btil1(0, 0), 0.8);
  EXPECT_DOUBLE_EQ(q.Btil2(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(q.Qtil(0, 0), 0.8);
  EXPECT_DOUBLE_EQ(q.Rtil1(0, 0), 0.8);
  EXPECT_NEAR(q.Gamma1(0, 0), -0.5, 1e-15);
  EXPECT_NEAR(q.Gamma2(0, 0), 0.375, 1e-15);
  EXPECT_NEAR(q.Lambda1(0, 0), -0.5, 1e-15);
  EXPECT_NEAR(q.Lambda2(0, 0), 0.375, 1e-15);
}

TEST(ModelTest, LambdaIsGammaPlusXiOnRandomModels) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const int l = 1 + trial % 2;
    const Model model(RandomParams(d, l, rng));
    const DerivedParams& q = model.derived();
    EXPECT_LE((q.Lambda1 - q.Gamma1 - q.Xi1).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((q.Lambda2 - q.Gamma2 - q.Xi2).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ModelTest, NoMeanFieldCouplingGivesUntildedQuantities) {
  ModelParams p = ReferenceParams();
  p.Abar = p.B1bar = p.B2bar = p.Qbar = p.R1bar = p.R2bar = Scalar(0.0);
  const Model model(p);
  const DerivedParams& q = model.derived();
  EXPECT_EQ(q.Atil, p.A);
  EXPECT_EQ(q.Btil1, p.B1);
  EXPECT_EQ(q.Qtil, p.Q);
  EXPECT_EQ(q.Rtil2, p.R2);
  EXPECT_EQ(q.Xi1(0, 0), 0.0);
  EXPECT_EQ(q.Xi2(0, 0), 0.0);
  EXPECT_NEAR(q.Lambda1(0, 0), q.Gamma1(0, 0), 1e-15);
}

TEST(ModelTest, ValidationErrors) {
  ModelParams p = ReferenceParams();
  p.gamma = 1.0;
  EXPECT_EQ(CodeOf([&] { Validate(p); }), ErrorCode::kBadDiscount);
  p.gamma = 0.0;
  EXPECT_EQ(CodeOf([&] { Validate(p); }), ErrorCode::kBadDiscount);

  p = ReferenceParams();
  p.R2 = Scalar(0.0);
  EXPECT_EQ(CodeOf([&] { Validate(p); }), ErrorCode::kNonPositiveDefinite);

  p = ReferenceParams();
  p.R1bar = Scalar(-0.4);
  EXPECT_EQ(CodeOf([&] { Validate(p); }), ErrorCode::kNonPositiveDefinite);

  p = ReferenceParams();
  p.B1 = Matrix::Zero(2, 1);
  EXPECT_EQ(CodeOf([&] { Validate(p); }), ErrorCode::kDimensionMismatch);

  p = ReferenceParams();
  p.noise.step_idio = Distribution::Gaussian(0.1, 0.01);
  EXPECT_EQ(CodeOf([&] { Validate(p); }), ErrorCode::kInvalidNoise);

  EXPECT_EQ(CodeOf([] { Distribution::Uniform(1.0, -1.0); }),
            ErrorCode::kInvalidNoise);
  EXPECT_EQ(CodeOf([] { Distribution::Gaussian(0.0, -1.0); }),
            ErrorCode::kInvalidNoise);
}

TEST(ModelTest, DistributionMoments) {
  const Distribution u = Distribution::Uniform(-1.0, 1.0);
  EXPECT_DOUBLE_EQ(u.CoordinateMean(), 0.0);
  EXPECT_DOUBLE_EQ(u.CoordinateVariance(), 1.0 / 3.0);
  const Distribution g = Distribution::Gaussian(0.5, 0.01);
  EXPECT_DOUBLE_EQ(g.SecondMoment(2)(0, 0), 0.26);
  EXPECT_DOUBLE_EQ(g.SecondMoment(2)(0, 1), 0.25);
  const Distribution pm = Distribution::PointMass(2.0);
  EXPECT_EQ(pm.Covariance(1)(0, 0), 0.0);
  EXPECT_EQ(pm.SecondMoment(1)(0, 0), 4.0);
}

TEST(ModelTest, NoiseStreamMatchesDistribution) {
  NoiseStream stream(5);
  const Distribution u = Distribution::Uniform(-1.0, 3.0);
  Vector v(1);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    stream.Draw(u, v);
    ASSERT_GE(v[0], -1.0);
    ASSERT_LT(v[0], 3.0);
    sum += v[0];
    sum2 += v[0] * v[0];
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_NEAR(mean, 1.0, 5 * std::sqrt(4.0 / 3.0 / n));
  EXPECT_NEAR(var, 4.0 / 3.0, 0.02);
}

TEST(ModelTest, StabilizingSetExamples) {
  const Model model(ReferenceParams());
  EXPECT_TRUE(InStabilizingSet(model, PolicyPair::Zero(1, 1)));
  EXPECT_DOUBLE_EQ(DeviationClosedLoop(model, Scalar(0), Scalar(0))(0, 0), 0.4);
  EXPECT_DOUBLE_EQ(MeanClosedLoop(model, Scalar(0), Scalar(0))(0, 0), 0.8);
  // 0.8 - 0.8 L1 + 0.6 L2 = 1.2 with L1 = 0, L2 = 2/3.
  EXPECT_FALSE(InStabilizingSet(model, ScalarPolicy(0, 0, 0, 2.0 / 3.0)));
  EXPECT_THROW(InStabilizingSet(model, PolicyPair::Zero(2, 1)), Error);
}

TEST(ModelTest, StabilizingSetMonotoneInDiscount) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const PolicyPair theta = ScalarPolicy(u(rng), u(rng), u(rng), u(rng));
    ModelParams p = ReferenceParams();
    bool previous = true;
    for (double gamma : {0.01, 0.2, 0.5, 0.9, 0.99}) {
      p.gamma = gamma;
      const bool inside = InStabilizingSet(Model(p), theta);
      if (!previous) {
        EXPECT_FALSE(inside);
      }
      previous = inside;
    }
  }
  ModelParams p = ReferenceParams();
  p.gamma = 1e-9;
  EXPECT_TRUE(InStabilizingSet(Model(p), ScalarPolicy(3, -3, 3, -3)));
}

TEST(ModelTest, ControlFromPolicyExamples) {
  const PolicyPair theta = ScalarPolicy(1, 2, 3, 4);
  const Controls c = ControlFromPolicy(theta, Vector::Constant(1, 1.0),
                                       Vector::Constant(1, 0.5));
  EXPECT_DOUBLE_EQ(c.u1[0], -1.5);
  EXPECT_DOUBLE_EQ(c.u2[0], 3.5);

  const Controls zero = ControlFromPolicy(PolicyPair::Zero(1, 1),
                                          Vector::Constant(1, 7.0),
                                          Vector::Constant(1, -2.0));
  EXPECT_EQ(zero.u1[0], 0.0);
  EXPECT_EQ(zero.u2[0], 0.0);

  const Controls same = ControlFromPolicy(theta, Vector::Constant(1, 0.3),
                                          Vector::Constant(1, 0.3));
  EXPECT_DOUBLE_EQ(same.u1[0], -2.0 * 0.3);
  EXPECT_DOUBLE_EQ(same.u2[0], 4.0 * 0.3);
}

TEST(ModelTest, ControlFromPolicyIsLinear) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  const auto vec = [&](int k) {
    Vector v(k);
    for (int i = 0; i < k; ++i) v[i] = n(rng);
    return v;
  };
  const auto mat = [&](int r, int c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
  };
  const PolicyPair theta{mat(2, 3), mat(2, 3), mat(2, 3), mat(2, 3)};
  const Vector x1 = vec(3), xb1 = vec(3), x2 = vec(3), xb2 = vec(3);
  const double a = 0.7, b = -1.3;
  const Controls c1 = ControlFromPolicy(theta, x1, xb1);
  const Controls c2 = ControlFromPolicy(theta, x2, xb2);
  const Controls mix = ControlFromPolicy(theta, a * x1 + b * x2, a * xb1 + b * xb2);
  EXPECT_LE((mix.u1 - (a * c1.u1 + b * c2.u1)).norm(), 1e-13);
  EXPECT_LE((mix.u2 - (a * c1.u2 + b * c2.u2)).norm(), 1e-13);
}

TEST(ModelTest, InstantaneousCostByHand) {
  const Model model(ReferenceParams());
  const auto v = [](double s) { return Vector::Constant(1, s); };
  // x = xbar = 1, no control: Qtil * 1 = 0.8.
  EXPECT_DOUBLE_EQ(InstantaneousCost(model, v(1), v(1), v(0), v(0), v(0), v(0)),
                   0.8);
  // Deviation term: Q (x - xbar)^2 = 0.4 * 4.
  EXPECT_DOUBLE_EQ(InstantaneousCost(model, v(2), v(0), v(0), v(0), v(0), v(0)),
                   1.6);
  // Player 2 control lowers the utility: -R2 (u2 - ubar2)^2 - R2til ubar2^2.
  EXPECT_DOUBLE_EQ(InstantaneousCost(model, v(0), v(0), v(0), v(0), v(2), v(1)),
                   -0.4 * 1.0 - 0.8 * 1.0);
  EXPECT_DOUBLE_EQ(InstantaneousCost(model, v(0), v(0), v(3), v(1), v(0), v(0)),
                   0.4 * 4.0 + 0.8 * 1.0);
}

}  // namespace
}  // namespace lqmftg
