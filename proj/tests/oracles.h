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

// Test-side reference computations. These deliberately avoid the library's
// solvers: scalar closed forms, plain value iteration, truncated series and
// finite differences.

#ifndef LQMFTG_TESTS_ORACLES_H_
#define LQMFTG_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "lqmftg/model.h"

namespace lqmftg::testing {

inline Matrix Scalar(double v) { return Matrix::Constant(1, 1, v); }

inline PolicyPair ScalarPolicy(double k1, double l1, double k2, double l2) {
  return {Scalar(k1), Scalar(l1), Scalar(k2), Scalar(l2)};
}

// Larger real root of a x^2 + b x + c = 0.
inline double LargerRoot(double a, double b, double c) {
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  return std::max((-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a));
}

// Coefficients of the scalar Riccati quadratic for P:
//   gamma (a P + 2q)(a + (b1 g1 + b2 g2) P) = P.
struct Quadratic {
  double a2, a1, a0;
};

inline Quadratic RiccatiQuadratic(double a, double b1, double b2, double q,
                                  double r1, double r2, double gamma) {
  const double g1 = -0.5 * b1 / r1;
  const double g2 = 0.5 * b2 / r2;
  const double s = b1 * g1 + b2 * g2;
  // gamma [a^2 P + a s P^2 + 2 q a + 2 q s P] - P = 0
  return {gamma * a * s, gamma * a * a + 2.0 * gamma * q * s - 1.0,
          2.0 * gamma * q * a};
}

// Discounted one-player LQ value by value iteration:
//   V <- Q + gamma A'VA - gamma^2 A'VB (R + gamma B'VB)^{-1} B'VA.
struct OnePlayer {
  Matrix V;
  Matrix K;  // optimal u = -K x
};

inline OnePlayer OnePlayerValueIteration(const Matrix& A, const Matrix& B,
                                         const Matrix& Q, const Matrix& R,
                                         double gamma, int iterations = 20000) {
  Matrix V = Q;
  Matrix K = Matrix::Zero(B.cols(), A.rows());
  for (int i = 0; i < iterations; ++i) {
    const Matrix H = R + gamma * B.transpose() * V * B;
    K = gamma * H.ldlt().solve(B.transpose() * V * A);
    const Matrix M = A - B * K;
    V = Q + K.transpose() * R * K + gamma * M.transpose() * V * M;
  }
  return {V, K};
}

// sum_{t < horizon} gamma^t (M')^t S M^t.
inline Matrix BruteForceSeries(const Matrix& M, const Matrix& S, double gamma,
                               int horizon) {
  Matrix term = S;
  Matrix sum = Matrix::Zero(S.rows(), S.cols());
  double discount = 1.0;
  for (int t = 0; t < horizon; ++t) {
    sum += discount * term;
    term = M.transpose() * term * M;
    discount *= gamma;
  }
  return sum;
}

// Central difference of f along every entry of `block` inside theta.
inline Matrix CentralDifference(const std::function<double(const PolicyPair&)>& f,
                                const PolicyPair& theta, Matrix PolicyPair::*block,
                                double h) {
  const Matrix& base = theta.*block;
  Matrix out(base.rows(), base.cols());
  for (Eigen::Index r = 0; r < base.rows(); ++r) {
    for (Eigen::Index c = 0; c < base.cols(); ++c) {
      PolicyPair plus = theta;
      PolicyPair minus = theta;
      (plus.*block)(r, c) += h;
      (minus.*block)(r, c) -= h;
      out(r, c) = (f(plus) - f(minus)) / (2.0 * h);
    }
  }
  return out;
}

// Normwise relative error with an absolute floor for tiny references.
inline double RelativeDifference(const Matrix& value, const Matrix& reference,
                                 double floor = 1e-8) {
  return (value - reference).norm() / std::max(reference.norm(), floor);
}

inline ModelParams ZeroNoise(ModelParams p) {
  p.noise = NoiseSpec{};
  return p;
}

}  // namespace lqmftg::testing

#endif  // LQMFTG_TESTS_ORACLES_H_
