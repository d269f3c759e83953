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

#include "lqmftg/value.h"

#include <cmath>
#include <sstream>

#include "lqmftg/error.h"

namespace lqmftg {
namespace {

constexpr double kMaxConditionNumber = 1e12;
constexpr double kSeriesTolerance = 1e-12;
constexpr int kMaxSeriesTerms = 10'000'000;

void RequireContraction(const Matrix& M, double gamma) {
  const double norm = SpectralNorm(M);
  if (!(gamma * norm * norm < 1.0)) {
    std::ostringstream os;
    os << "gamma * ||M||^2 = " << gamma * norm * norm << " >= 1";
    throw Error(ErrorCode::kNotStabilizing, os.str());
  }
}

Matrix SolveByKronecker(const Matrix& M, const Matrix& S, double gamma) {
  const Eigen::Index d = M.rows();
  const Eigen::Index n = d * d;
  // vec(M^T P M) = (M^T kron M^T) vec(P), column-major vec.
  Matrix system = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double outer = gamma * M(j, i);
      if (outer == 0.0) continue;
      for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = 0; l < d; ++l) {
          system(i * d + k, j * d + l) -= outer * M(l, k);
        }
      }
    }
  }
  const Eigen::PartialPivLU<Matrix> lu(system);
  if (!(lu.rcond() * kMaxConditionNumber > 1.0)) {
    throw Error(ErrorCode::kNotStabilizing,
                "discounted Lyapunov system is numerically singular");
  }
  const Vector vec_s = Eigen::Map<const Vector>(S.data(), n);
  const Vector vec_p = lu.solve(vec_s);
  return Eigen::Map<const Matrix>(vec_p.data(), d, d);
}

Matrix SolveBySeries(const Matrix& M, const Matrix& S, double gamma) {
  Matrix sum = S;
  Matrix term = S;
  for (int t = 0; t < kMaxSeriesTerms; ++t) {
    term = gamma * M.transpose() * term * M;
    sum += term;
    if (term.norm() <= kSeriesTolerance * (1.0 + sum.norm())) return sum;
  }
  throw Error(ErrorCode::kNoConvergence, "discounted series did not settle");
}

}  // namespace

Matrix SolveDiscountedLyapunov(const Matrix& M, const Matrix& S,
                               double gamma) {
  if (M.rows() != M.cols() || S.rows() != M.rows() || S.cols() != M.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Lyapunov operands must be square and of equal size");
  }
  RequireContraction(M, gamma);
  if (M.rows() <= kMaxKroneckerDim) return SolveByKronecker(M, S, gamma);
  return SolveBySeries(M, S, gamma);
}

Matrix DiscountedSecondMoment(const Matrix& M, const Matrix& V0,
                              const Matrix& W, double gamma) {
  if (W.rows() != V0.rows() || W.cols() != V0.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "V0 and W differ in size");
  }
  const Matrix source = V0 + (gamma / (1.0 - gamma)) * W;
  return SolveDiscountedLyapunov(M.transpose(), source, gamma);
}

Subsystem DeviationSubsystem(const Model& model) {
  const ModelParams& p = model.params();
  const int d = model.state_dim();
  Subsystem sub;
  sub.A = p.A;
  sub.B1 = p.B1;
  sub.B2 = p.B2;
  sub.Q = p.Q;
  sub.R1 = p.R1;
  sub.R2 = p.R2;
  // y_0 = e1_0 - E[e1_0].
  sub.initial_moment = p.noise.init_idio.Covariance(d);
  sub.noise_cov = p.noise.step_idio.Covariance(d);
  sub.gamma = p.gamma;
  return sub;
}

Subsystem MeanSubsystem(const Model& model) {
  const ModelParams& p = model.params();
  const DerivedParams& q = model.derived();
  const int d = model.state_dim();
  Subsystem sub;
  sub.A = q.Atil;
  sub.B1 = q.Btil1;
  sub.B2 = q.Btil2;
  sub.Q = q.Qtil;
  sub.R1 = q.Rtil1;
  sub.R2 = q.Rtil2;
  // z_0 = e0_0 + E[e1_0].
  const Vector mean = p.noise.init_common.Mean(d) + p.noise.init_idio.Mean(d);
  sub.initial_moment =
      p.noise.init_common.Covariance(d) + mean * mean.transpose();
  sub.noise_cov = p.noise.step_common.Covariance(d);
  sub.gamma = p.gamma;
  return sub;
}

Matrix SubsystemClosedLoop(const Subsystem& sub, const Matrix& G1,
                           const Matrix& G2) {
  return sub.A - sub.B1 * G1 + sub.B2 * G2;
}

Matrix SubsystemStageCost(const Subsystem& sub, const Matrix& G1,
                          const Matrix& G2) {
  return sub.Q + G1.transpose() * sub.R1 * G1 - G2.transpose() * sub.R2 * G2;
}

SubsystemValue EvaluateSubsystem(const Subsystem& sub, const Matrix& G1,
                                 const Matrix& G2) {
  const Matrix M = SubsystemClosedLoop(sub, G1, G2);
  SubsystemValue out;
  out.P = SolveDiscountedLyapunov(M, SubsystemStageCost(sub, G1, G2),
                                  sub.gamma);
  out.Sigma = DiscountedSecondMoment(M, sub.initial_moment, sub.noise_cov,
                                     sub.gamma);
  out.cost = (out.P * sub.initial_moment).trace() +
             sub.gamma / (1.0 - sub.gamma) * (out.P * sub.noise_cov).trace();
  return out;
}

SubsystemGradient SubsystemPolicyGradient(const Subsystem& sub,
                                          const Matrix& G1, const Matrix& G2,
                                          const SubsystemValue& value) {
  const Matrix& P = value.P;
  const double gamma = sub.gamma;
  const Eigen::Index l = sub.R1.rows();
  const Eigen::Index d = sub.A.rows();

  SubsystemGradient out;
  out.R_block.resize(2 * l, 2 * l);
  out.R_block << sub.R1 + gamma * sub.B1.transpose() * P * sub.B1,
      -gamma * sub.B1.transpose() * P * sub.B2,
      -gamma * sub.B2.transpose() * P * sub.B1,
      -sub.R2 + gamma * sub.B2.transpose() * P * sub.B2;

  Matrix gains(2 * l, d);
  gains << G1, G2;
  Matrix drift(2 * l, d);
  drift << sub.B1.transpose() * P * sub.A, -sub.B2.transpose() * P * sub.A;

  const Matrix E = -gamma * drift + out.R_block * gains;
  out.E1 = E.topRows(l);
  out.E2 = E.bottomRows(l);
  out.g1 = 2.0 * out.E1 * value.Sigma;
  out.g2 = 2.0 * out.E2 * value.Sigma;
  return out;
}

Matrix SolvePy(const Model& model, const Matrix& K1, const Matrix& K2) {
  const Subsystem sub = DeviationSubsystem(model);
  return SolveDiscountedLyapunov(SubsystemClosedLoop(sub, K1, K2),
                                 SubsystemStageCost(sub, K1, K2), sub.gamma);
}

Matrix SolvePz(const Model& model, const Matrix& L1, const Matrix& L2) {
  const Subsystem sub = MeanSubsystem(model);
  return SolveDiscountedLyapunov(SubsystemClosedLoop(sub, L1, L2),
                                 SubsystemStageCost(sub, L1, L2), sub.gamma);
}

namespace {

ValueSolution Combine(const SubsystemValue& y, const SubsystemValue& z) {
  ValueSolution out;
  out.Py = y.P;
  out.Pz = z.P;
  out.SigmaY = y.Sigma;
  out.SigmaZ = z.Sigma;
  out.Cy = y.cost;
  out.Cz = z.cost;
  out.C = out.Cy + out.Cz;
  return out;
}

}  // namespace

ValueSolution ExactUtility(const Model& model, const PolicyPair& theta) {
  CheckPolicyDims(model, theta);
  const SubsystemValue y =
      EvaluateSubsystem(DeviationSubsystem(model), theta.K1, theta.K2);
  const SubsystemValue z =
      EvaluateSubsystem(MeanSubsystem(model), theta.L1, theta.L2);
  return Combine(y, z);
}

GradientPair ExactGradient(const Model& model, const PolicyPair& theta) {
  CheckPolicyDims(model, theta);
  const Subsystem ysub = DeviationSubsystem(model);
  const Subsystem zsub = MeanSubsystem(model);
  const SubsystemValue y = EvaluateSubsystem(ysub, theta.K1, theta.K2);
  const SubsystemValue z = EvaluateSubsystem(zsub, theta.L1, theta.L2);
  const SubsystemGradient gy =
      SubsystemPolicyGradient(ysub, theta.K1, theta.K2, y);
  const SubsystemGradient gz =
      SubsystemPolicyGradient(zsub, theta.L1, theta.L2, z);

  GradientPair out;
  out.gK1 = gy.g1;
  out.gK2 = gy.g2;
  out.gL1 = gz.g1;
  out.gL2 = gz.g2;
  out.Ey1 = gy.E1;
  out.Ey2 = gy.E2;
  out.Ez1 = gz.E1;
  out.Ez2 = gz.E2;
  out.R_y = gy.R_block;
  out.R_z = gz.R_block;
  out.value = Combine(y, z);
  return out;
}

}  // namespace lqmftg
