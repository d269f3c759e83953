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

// Closed-form evaluation of a linear policy pair.
//
// Under linear feedback the state splits into two decoupled processes: the
// deviation y = x - xbar, driven by (K1, K2), and the conditional mean
// z = xbar, driven by (L1, L2). Each is a discounted LQ system whose cost is
// a trace against the solution of a discounted Lyapunov equation, and whose
// policy gradient is 2 E_j Sigma with E_j the stationarity residual of player
// j and Sigma the discounted second moment of the process.

#ifndef LQMFTG_VALUE_H_
#define LQMFTG_VALUE_H_

#include "lqmftg/model.h"

namespace lqmftg {

// Largest state dimension solved exactly through the d^2 x d^2 vectorized
// system; beyond it the discounted series is accumulated.
inline constexpr int kMaxKroneckerDim = 32;

// Solves P = S + gamma M^T P M. Throws kNotStabilizing when gamma ||M||^2 >= 1
// or the vectorized system is numerically singular.
Matrix SolveDiscountedLyapunov(const Matrix& M, const Matrix& S, double gamma);

// Solves Sigma = V0 + gamma M Sigma M^T + gamma / (1 - gamma) W, i.e. the
// discounted sum of E[s_t s_t^T] for s_{t+1} = M s_t + noise with
// E[s_0 s_0^T] = V0 and noise covariance W.
Matrix DiscountedSecondMoment(const Matrix& M, const Matrix& V0,
                              const Matrix& W, double gamma);

// One of the two decoupled LQ processes. Player 1 enters the closed loop as
// -B1 G1 and pays G1^T R1 G1; player 2 enters as +B2 G2 and pays -G2^T R2 G2.
struct Subsystem {
  Matrix A, B1, B2, Q, R1, R2;
  Matrix initial_moment;  // E[s_0 s_0^T]
  Matrix noise_cov;       // covariance of every step noise
  double gamma = 0.9;
};

Subsystem DeviationSubsystem(const Model& model);
Subsystem MeanSubsystem(const Model& model);

Matrix SubsystemClosedLoop(const Subsystem& sub, const Matrix& G1,
                           const Matrix& G2);
// Q + G1^T R1 G1 - G2^T R2 G2.
Matrix SubsystemStageCost(const Subsystem& sub, const Matrix& G1,
                          const Matrix& G2);

struct SubsystemValue {
  Matrix P;      // value matrix of the Lyapunov equation
  Matrix Sigma;  // discounted second moment
  double cost = 0.0;
};

SubsystemValue EvaluateSubsystem(const Subsystem& sub, const Matrix& G1,
                                 const Matrix& G2);

struct SubsystemGradient {
  Matrix E1, E2;
  Matrix R_block;  // 2l x 2l coupling matrix
  Matrix g1, g2;
};

SubsystemGradient SubsystemPolicyGradient(const Subsystem& sub,
                                          const Matrix& G1, const Matrix& G2,
                                          const SubsystemValue& value);

Matrix SolvePy(const Model& model, const Matrix& K1, const Matrix& K2);
Matrix SolvePz(const Model& model, const Matrix& L1, const Matrix& L2);

struct ValueSolution {
  Matrix Py, Pz;
  Matrix SigmaY, SigmaZ;
  double Cy = 0.0;
  double Cz = 0.0;
  double C = 0.0;  // Cy + Cz
};

// Discounted utility of theta under the mean-field dynamics.
ValueSolution ExactUtility(const Model& model, const PolicyPair& theta);

struct GradientPair {
  Matrix gK1, gL1, gK2, gL2;
  // Diagnostics.
  Matrix Ey1, Ey2, Ez1, Ez2;
  Matrix R_y, R_z;
  ValueSolution value;
};

GradientPair ExactGradient(const Model& model, const PolicyPair& theta);

}  // namespace lqmftg

#endif  // LQMFTG_VALUE_H_
