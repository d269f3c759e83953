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

// Nash equilibrium of the game through its two Riccati equations
//
//   P    = gamma [A^T P + 2Q] [A + (B1 Gamma1 + B2 Gamma2) P]
//   Pbar = gamma [Atil^T Pbar + 2Qtil] [Atil + (Btil1 Lambda1 + Btil2 Lambda2) Pbar]
//
// plus single-player best responses and a second, gradient-based route to the
// same equilibrium for scalar models.

#ifndef LQMFTG_RICCATI_H_
#define LQMFTG_RICCATI_H_

#include "lqmftg/model.h"

namespace lqmftg {

struct RiccatiOptions {
  double tolerance = 1e-12;
  int max_iterations = 100'000;
  // P <- (1 - damping) P + damping Map(P).
  double damping = 1.0;
  // Iterates whose norm exceeds this are declared divergent.
  double divergence_cap = 1e8;
};

struct RiccatiSolution {
  Matrix P;
  Matrix Pbar;
  double residual_P = 0.0;
  double residual_Pbar = 0.0;
  int iterations = 0;  // total over both equations
};

// Right-hand sides of the two equations, exposed for residual checks.
Matrix RiccatiMapP(const Model& model, const Matrix& P);
Matrix RiccatiMapPbar(const Model& model, const Matrix& Pbar);

// Damped fixed-point iteration from P = 2Q, Pbar = 2Qtil. Throws
// kNoConvergence or kNonStabilizingSolution.
RiccatiSolution SolveRiccati(const Model& model,
                             const RiccatiOptions& options = {});

// K_i = 1/2 R_i^{-1} B_i^T P and L_i = 1/2 Rtil_i^{-1} Btil_i^T Pbar.
PolicyPair NashPolicy(const Model& model, const RiccatiSolution& solution);

struct BestResponseOptions {
  double tolerance = 1e-13;
  int max_iterations = 100'000;
  double damping = 1.0;
  double divergence_cap = 1e8;
};

struct BestResponse {
  Matrix gain;
  Matrix value;  // P^y (or P^z) of the inner one-player problem
  int iterations = 0;
};

// Player 1's K gain against a fixed K2:
//   K1*(K2) = gamma (R1 + gamma B1^T P B1)^{-1} B1^T P (A + B2 K2),
// with P the value matrix of the inner LQ problem. Value iteration from
// P = Q_eff, falling back to policy iteration. Throws kNoConvergence or
// kIndefiniteInnerProblem.
BestResponse BestResponseK1(const Model& model, const Matrix& K2,
                            const BestResponseOptions& options = {});
// Player 2's K gain against a fixed K1 (maximization).
BestResponse BestResponseK2(const Model& model, const Matrix& K1,
                            const BestResponseOptions& options = {});
// Mean-field gains, same contracts on the tilde system.
BestResponse BestResponseL1(const Model& model, const Matrix& L2,
                            const BestResponseOptions& options = {});
BestResponse BestResponseL2(const Model& model, const Matrix& L1,
                            const BestResponseOptions& options = {});

// Scalar models only: bisection for the K2 (resp. L2) at which player 2's
// gradient vanishes against player 1's best response. The scan covers the
// interval where gamma |A + B2 K2|^2 < 1 (resp. the tilde analogue), widened
// by its own width on each side. Throws kDegenerateProblem
// when player 2 has no control authority and kNoRoot when no sign change is
// bracketed.
PolicyPair NashViaGradientRoot(const Model& model, double tolerance = 1e-12);

}  // namespace lqmftg

#endif  // LQMFTG_RICCATI_H_
