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

// Game definition for the linear-quadratic zero-sum mean-field type game:
// dynamics and cost matrices, noise descriptors, the quantities derived from
// them, and the linear policy parametrization
//
//   u_i = (-1)^i K_i (x - xbar) + (-1)^i L_i xbar,   i = 1, 2.
//
// Player 1 minimizes, player 2 maximizes. States live in R^d, controls in
// R^l; gains K_i, L_i are l x d.

#ifndef LQMFTG_MODEL_H_
#define LQMFTG_MODEL_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "lqmftg/rng.h"

namespace lqmftg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class DistributionKind { kUniform, kGaussian, kPointMass };

// Distribution of a noise vector whose coordinates are i.i.d. copies of one
// scalar law. Downstream code only needs the mean, the second moments and a
// sampler, so further families can be added here without touching callers.
class Distribution {
 public:
  static Distribution Uniform(double lo, double hi);
  static Distribution Gaussian(double mean, double variance);
  static Distribution PointMass(double value = 0.0);

  DistributionKind kind() const { return kind_; }
  // uniform: (lo, hi); gaussian: (mean, variance); point mass: (value, 0).
  double first() const { return first_; }
  double second() const { return second_; }

  double CoordinateMean() const;
  double CoordinateVariance() const;

  Vector Mean(int dim) const;
  Matrix Covariance(int dim) const;
  // E[e e^T] = Cov + mean mean^T.
  Matrix SecondMoment(int dim) const;

  std::string ToString() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  Distribution(DistributionKind kind, double first, double second)
      : kind_(kind), first_(first), second_(second) {}

  DistributionKind kind_ = DistributionKind::kPointMass;
  double first_ = 0.0;
  double second_ = 0.0;
};

struct NoiseSpec {
  Distribution init_common = Distribution::PointMass();
  Distribution init_idio = Distribution::PointMass();
  Distribution step_common = Distribution::PointMass();
  Distribution step_idio = Distribution::PointMass();
};

// One independent random stream. Each noise source of a rollout owns one.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}

  template <typename Vec>
  void Draw(const Distribution& dist, Vec& out) {
    switch (dist.kind()) {
      case DistributionKind::kUniform:
        for (Eigen::Index i = 0; i < out.size(); ++i)
          out[i] = dist.first() + (dist.second() - dist.first()) * unit_(engine_);
        break;
      case DistributionKind::kGaussian: {
        const double sd = std::sqrt(dist.second());
        for (Eigen::Index i = 0; i < out.size(); ++i)
          out[i] = dist.first() + sd * normal_(engine_);
        break;
      }
      case DistributionKind::kPointMass:
        out.setConstant(dist.first());
        break;
    }
  }

 private:
  Xoshiro256pp engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

struct ModelParams {
  int state_dim = 1;    // d
  int control_dim = 1;  // l
  Matrix A, Abar;                      // d x d
  Matrix B1, B1bar, B2, B2bar;         // d x l
  Matrix Q, Qbar;                      // d x d, symmetric
  Matrix R1, R1bar, R2, R2bar;         // l x l, symmetric
  double gamma = 0.9;
  NoiseSpec noise;
};

// Tilde quantities (sum of individual and mean-field coefficients) and the
// feedback coefficient matrices, all l x d for the Gamma/Xi/Lambda family:
//   Gamma_i  = (-1)^i 1/2 R_i^{-1} B_i^T
//   Xi_i     = (-1)^i 1/2 R_i^{-1} [Bbar_i^T - Rbar_i Rtil_i^{-1} Btil_i^T]
//   Lambda_i = (-1)^i 1/2 Rtil_i^{-1} Btil_i^T  (= Gamma_i + Xi_i)
struct DerivedParams {
  Matrix Atil, Btil1, Btil2, Qtil, Rtil1, Rtil2;
  Matrix Gamma1, Gamma2, Xi1, Xi2, Lambda1, Lambda2;
};

// Checks dimensions, symmetry, positive definiteness of R_i and R_i + Rbar_i,
// the discount range and the noise menu. Throws Error on failure.
DerivedParams Validate(const ModelParams& params);

// A validated model. Immutable.
class Model {
 public:
  explicit Model(ModelParams params);

  const ModelParams& params() const { return params_; }
  const DerivedParams& derived() const { return derived_; }
  int state_dim() const { return params_.state_dim; }
  int control_dim() const { return params_.control_dim; }
  double gamma() const { return params_.gamma; }

 private:
  ModelParams params_;
  DerivedParams derived_;
};

struct PolicyPair {
  Matrix K1, L1, K2, L2;

  static PolicyPair Zero(int state_dim, int control_dim);
  bool AllFinite() const;
};

// Throws kDimensionMismatch unless every gain is control_dim x state_dim.
void CheckPolicyDims(const Model& model, const PolicyPair& theta);

// A - B1 K1 + B2 K2: closed loop of the deviation x - xbar.
Matrix DeviationClosedLoop(const Model& model, const Matrix& K1,
                           const Matrix& K2);
// Atil - Btil1 L1 + Btil2 L2: closed loop of the conditional mean.
Matrix MeanClosedLoop(const Model& model, const Matrix& L1, const Matrix& L2);

// Largest singular value.
double SpectralNorm(const Matrix& m);

// gamma ||A - B1 K1 + B2 K2||^2 < 1 and gamma ||Atil - Btil1 L1 + Btil2 L2||^2
// < 1 with the operator 2-norm.
bool InStabilizingSet(const Model& model, const PolicyPair& theta);

struct Controls {
  Vector u1;
  Vector u2;
};

Controls ControlFromPolicy(const PolicyPair& theta, const Vector& x,
                           const Vector& xbar);

// Instantaneous utility c(x, xbar, u1, ubar1, u2, ubar2).
double InstantaneousCost(const Model& model, const Vector& x,
                         const Vector& xbar, const Vector& u1,
                         const Vector& ubar1, const Vector& u2,
                         const Vector& ubar2);

// The scalar model used throughout the experiments: A = Abar = 0.4,
// B1 = B1bar = 0.4, B2 = B2bar = 0.3, Q = Qbar = 0.4, all R blocks 0.4,
// gamma = 0.9, U[-1,1] initial noises and N(0, 0.01) step noises.
ModelParams ReferenceParams();

}  // namespace lqmftg

#endif  // LQMFTG_MODEL_H_
