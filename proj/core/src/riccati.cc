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

#include "lqmftg/riccati.h"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "lqmftg/error.h"
#include "lqmftg/value.h"

namespace lqmftg {

Matrix RiccatiMapP(const Model& model, const Matrix& P) {
  const ModelParams& p = model.params();
  const DerivedParams& q = model.derived();
  return p.gamma * (p.A.transpose() * P + 2.0 * p.Q) *
         (p.A + (p.B1 * q.Gamma1 + p.B2 * q.Gamma2) * P);
}

Matrix RiccatiMapPbar(const Model& model, const Matrix& Pbar) {
  const DerivedParams& q = model.derived();
  return model.gamma() * (q.Atil.transpose() * Pbar + 2.0 * q.Qtil) *
         (q.Atil + (q.Btil1 * q.Lambda1 + q.Btil2 * q.Lambda2) * Pbar);
}

namespace {

struct FixedPoint {
  Matrix value;
  double residual = 0.0;
  int iterations = 0;
};

FixedPoint Iterate(const std::function<Matrix(const Matrix&)>& map,
                   Matrix start, const RiccatiOptions& options,
                   const char* name) {
  Matrix current = std::move(start);
  for (int k = 0; k <= options.max_iterations; ++k) {
    const Matrix image = map(current);
    const double residual = SpectralNorm(image - current);
    if (!std::isfinite(residual)) break;
    if (residual <= options.tolerance) return {current, residual, k};
    current = (1.0 - options.damping) * current + options.damping * image;
    if (current.norm() > options.divergence_cap) {
      throw Error(ErrorCode::kNoConvergence,
                  std::string(name) + " iterates diverged");
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              std::string(name) + " did not reach the tolerance");
}

bool NegativeDefinite(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  return eig.eigenvalues().maxCoeff() < 0.0;
}

}  // namespace

RiccatiSolution SolveRiccati(const Model& model,
                             const RiccatiOptions& options) {
  if (!(options.damping > 0.0 && options.damping <= 1.0) ||
      !(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad Riccati solver options");
  }
  const FixedPoint p = Iterate(
      [&](const Matrix& m) { return RiccatiMapP(model, m); },
      2.0 * model.params().Q, options, "P");
  const FixedPoint pbar = Iterate(
      [&](const Matrix& m) { return RiccatiMapPbar(model, m); },
      2.0 * model.derived().Qtil, options, "Pbar");

  RiccatiSolution out;
  out.P = p.value;
  out.Pbar = pbar.value;
  out.residual_P = p.residual;
  out.residual_Pbar = pbar.residual;
  out.iterations = p.iterations + pbar.iterations;

  if (NegativeDefinite(out.P) || NegativeDefinite(out.Pbar)) {
    throw Error(ErrorCode::kNonStabilizingSolution,
                "Riccati fixed point is negative definite");
  }
  if (!InStabilizingSet(model, NashPolicy(model, out))) {
    throw Error(ErrorCode::kNonStabilizingSolution,
                "Riccati fixed point does not stabilize the closed loop");
  }
  return out;
}

PolicyPair NashPolicy(const Model& model, const RiccatiSolution& solution) {
  const ModelParams& p = model.params();
  const DerivedParams& q = model.derived();
  const auto gain = [](const Matrix& R, const Matrix& B, const Matrix& P) {
    const Eigen::LDLT<Matrix> ldlt(R);
    if (ldlt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularR, "R block is not invertible");
    }
    return Matrix(0.5 * ldlt.solve(B.transpose() * P));
  };
  return PolicyPair{gain(p.R1, p.B1, solution.P),
                    gain(q.Rtil1, q.Btil1, solution.Pbar),
                    gain(p.R2, p.B2, solution.P),
                    gain(q.Rtil2, q.Btil2, solution.Pbar)};
}

namespace {

constexpr int kMaxPolicyIterations = 200;

// One-player discounted LQ problem on the closed loop A_eff +/- B G. The
// minimizer enters as -B G with cost +G^T R G, the maximizer as +B G with
// cost -G^T R G. The stationary gain is G = gamma H^{-1} B^T P A_eff with
// H = R + s gamma B^T P B, s = +1 for the minimizer and -1 for the maximizer.
struct InnerProblem {
  Matrix A_eff;
  Matrix B;
  Matrix Q_eff;
  Matrix R;
  double gamma = 0.9;
  bool maximize = false;
};

BestResponse ValueIteration(const InnerProblem& prob,
                            const BestResponseOptions& options) {
  const double s = prob.maximize ? -1.0 : 1.0;
  const double gamma = prob.gamma;
  const auto stationary_gain = [&](const Matrix& P) -> std::optional<Matrix> {
    const Matrix H = prob.R + s * gamma * prob.B.transpose() * P * prob.B;
    const Eigen::LDLT<Matrix> ldlt(0.5 * (H + H.transpose()));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 0.0) {
      return std::nullopt;
    }
    return Matrix(gamma * ldlt.solve(prob.B.transpose() * P * prob.A_eff));
  };

  Matrix P = prob.Q_eff;
  double previous_norm = P.norm();
  int growth_streak = 0;
  for (int k = 0; k <= options.max_iterations; ++k) {
    const std::optional<Matrix> G = stationary_gain(P);
    if (!G) {
      throw Error(ErrorCode::kIndefiniteInnerProblem,
                  "inner curvature R + s gamma B^T P B lost definiteness");
    }
    const Matrix M = prob.A_eff - s * prob.B * *G;
    const Matrix image = prob.Q_eff + s * G->transpose() * prob.R * *G +
                         gamma * M.transpose() * P * M;
    const double residual = SpectralNorm(image - P);
    if (residual <= options.tolerance) {
      const std::optional<Matrix> gain = stationary_gain(P);
      return BestResponse{*gain, P, k};
    }
    P = (1.0 - options.damping) * P + options.damping * image;
    const double norm = P.norm();
    growth_streak = norm > previous_norm ? growth_streak + 1 : 0;
    previous_norm = norm;
    if (!std::isfinite(norm) || norm > options.divergence_cap) {
      throw Error(growth_streak > 0 ? ErrorCode::kIndefiniteInnerProblem
                                    : ErrorCode::kNoConvergence,
                  "inner value iteration diverged");
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              "inner value iteration did not reach the tolerance");
}

// Policy iteration on the equivalent minimization, started from the gain of
// the same dynamics under identity state cost.
BestResponse PolicyIteration(const InnerProblem& prob,
                             const BestResponseOptions& options) {
  const double s = prob.maximize ? -1.0 : 1.0;
  const double gamma = prob.gamma;
  InnerProblem start = prob;
  start.maximize = false;
  start.Q_eff = Matrix::Identity(prob.Q_eff.rows(), prob.Q_eff.cols());
  Matrix G = ValueIteration(start, options).gain;
  const Matrix Q = s * prob.Q_eff;
  Matrix P;
  for (int k = 0; k < kMaxPolicyIterations; ++k) {
    const Matrix M = prob.A_eff - prob.B * G;
    const Matrix next =
        SolveDiscountedLyapunov(M, Q + G.transpose() * prob.R * G, gamma);
    const Matrix H = prob.R + gamma * prob.B.transpose() * next * prob.B;
    const Eigen::LDLT<Matrix> ldlt(0.5 * (H + H.transpose()));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 0.0) {
      throw Error(ErrorCode::kIndefiniteInnerProblem,
                  "inner curvature R + s gamma B^T P B lost definiteness");
    }
    G = gamma * ldlt.solve(prob.B.transpose() * next * prob.A_eff);
    const bool done = k > 0 && SpectralNorm(next - P) <= options.tolerance *
                                                           (1.0 + next.norm());
    P = next;
    if (done) return BestResponse{G, s * P, k};
  }
  throw Error(ErrorCode::kNoConvergence,
              "inner policy iteration did not reach the tolerance");
}

BestResponse SolveInner(const InnerProblem& prob,
                        const BestResponseOptions& options) {
  try {
    return ValueIteration(prob, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kIndefiniteInnerProblem &&
        e.code() != ErrorCode::kNoConvergence) {
      throw;
    }
  }
  return PolicyIteration(prob, options);
}

void CheckGain(const Model& model, const Matrix& G) {
  if (G.rows() != model.control_dim() || G.cols() != model.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "opponent gain has wrong shape");
  }
}

}  // namespace

BestResponse BestResponseK1(const Model& model, const Matrix& K2,
                            const BestResponseOptions& options) {
  CheckGain(model, K2);
  const ModelParams& p = model.params();
  return SolveInner({p.A + p.B2 * K2, p.B1,
                     p.Q - K2.transpose() * p.R2 * K2, p.R1, p.gamma, false},
                    options);
}

BestResponse BestResponseK2(const Model& model, const Matrix& K1,
                            const BestResponseOptions& options) {
  CheckGain(model, K1);
  const ModelParams& p = model.params();
  return SolveInner({p.A - p.B1 * K1, p.B2,
                     p.Q + K1.transpose() * p.R1 * K1, p.R2, p.gamma, true},
                    options);
}

BestResponse BestResponseL1(const Model& model, const Matrix& L2,
                            const BestResponseOptions& options) {
  CheckGain(model, L2);
  const DerivedParams& q = model.derived();
  return SolveInner({q.Atil + q.Btil2 * L2, q.Btil1,
                     q.Qtil - L2.transpose() * q.Rtil2 * L2, q.Rtil1,
                     model.gamma(), false},
                    options);
}

BestResponse BestResponseL2(const Model& model, const Matrix& L1,
                            const BestResponseOptions& options) {
  CheckGain(model, L1);
  const DerivedParams& q = model.derived();
  return SolveInner({q.Atil - q.Btil1 * L1, q.Btil2,
                     q.Qtil + L1.transpose() * q.Rtil1 * L1, q.Rtil2,
                     model.gamma(), true},
                    options);
}

namespace {

constexpr int kScanPoints = 400;
constexpr int kMaxBisections = 200;

struct RootResult {
  double opponent;  // player 2 gain at the root
  double response;  // player 1 best response there
};

// Player 2's gradient along player 1's best-response curve, on one of the two
// subsystems. Returns nullopt where the inner problem is ill posed.
using ResponseCurve = std::function<std::optional<double>(double, double*)>;

RootResult Bisect(const ResponseCurve& curve, double lo, double hi,
                  double tolerance, const char* name) {
  std::vector<double> grid(kScanPoints);
  std::vector<std::optional<double>> values(kScanPoints);
  for (int i = 0; i < kScanPoints; ++i) {
    grid[i] = lo + (hi - lo) * (i + 1.0) / (kScanPoints + 1.0);
    values[i] = curve(grid[i], nullptr);
  }

  // Among bracketed sign changes keep the one closest to zero.
  std::optional<std::pair<double, double>> best;
  for (int i = 0; i + 1 < kScanPoints; ++i) {
    if (!values[i] || !values[i + 1]) continue;
    if (*values[i] == 0.0) {
      best = std::pair{grid[i], grid[i]};
      break;
    }
    if ((*values[i] > 0.0) != (*values[i + 1] > 0.0)) {
      const double mid = 0.5 * (grid[i] + grid[i + 1]);
      if (!best || std::abs(mid) < std::abs(0.5 * (best->first + best->second)))
        best = std::pair{grid[i], grid[i + 1]};
    }
  }
  if (!best) {
    throw Error(ErrorCode::kNoRoot,
                std::string("no sign change of the ") + name +
                    " gradient over the scanned interval");
  }

  double a = best->first;
  double b = best->second;
  double fa = *curve(a, nullptr);
  for (int k = 0; k < kMaxBisections && b - a > tolerance; ++k) {
    const double m = 0.5 * (a + b);
    const std::optional<double> fm = curve(m, nullptr);
    if (!fm) {
      throw Error(ErrorCode::kNoRoot, "inner problem ill posed inside bracket");
    }
    if ((*fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = *fm;
    } else {
      b = m;
    }
  }
  RootResult out{0.5 * (a + b), 0.0};
  if (!curve(out.opponent, &out.response)) {
    throw Error(ErrorCode::kNoRoot, "inner problem ill posed at the root");
  }
  return out;
}

// Interval of g with gamma |a + b g|^2 < 1.
// Opponent gains to scan. The response adds its own feedback, so the scan
// extends one interval width past the set that is stabilizing on its own.
std::pair<double, double> ScanInterval(double a, double b, double gamma) {
  const double r = 1.0 / std::sqrt(gamma);
  double lo = (-r - a) / b;
  double hi = (r - a) / b;
  if (lo > hi) std::swap(lo, hi);
  const double width = hi - lo;
  return {lo - width, hi + width};
}

}  // namespace

PolicyPair NashViaGradientRoot(const Model& model, double tolerance) {
  if (model.state_dim() != 1 || model.control_dim() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "gradient-root benchmark is implemented for d = l = 1 only");
  }
  const ModelParams& p = model.params();
  const DerivedParams& q = model.derived();
  const double b2 = p.B2(0, 0);
  const double b2til = q.Btil2(0, 0);
  if (b2 == 0.0 || b2til == 0.0) {
    throw Error(ErrorCode::kDegenerateProblem,
                "player 2 has no control authority; every gain is stationary");
  }

  const BestResponseOptions inner{.tolerance = 1e-14};
  const auto scalar = [](double v) { return Matrix::Constant(1, 1, v); };

  const Subsystem ysub = DeviationSubsystem(model);
  const ResponseCurve k_curve = [&](double k2,
                                    double* k1_out) -> std::optional<double> {
    try {
      const Matrix k1 = BestResponseK1(model, scalar(k2), inner).gain;
      const SubsystemValue value = EvaluateSubsystem(ysub, k1, scalar(k2));
      if (k1_out) *k1_out = k1(0, 0);
      return SubsystemPolicyGradient(ysub, k1, scalar(k2), value).g2(0, 0);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const Subsystem zsub = MeanSubsystem(model);
  const ResponseCurve l_curve = [&](double l2,
                                    double* l1_out) -> std::optional<double> {
    try {
      const Matrix l1 = BestResponseL1(model, scalar(l2), inner).gain;
      const SubsystemValue value = EvaluateSubsystem(zsub, l1, scalar(l2));
      if (l1_out) *l1_out = l1(0, 0);
      return SubsystemPolicyGradient(zsub, l1, scalar(l2), value).g2(0, 0);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  const auto [klo, khi] = ScanInterval(p.A(0, 0), b2, p.gamma);
  const auto [llo, lhi] = ScanInterval(q.Atil(0, 0), b2til, p.gamma);
  const RootResult k = Bisect(k_curve, klo, khi, tolerance, "K2");
  const RootResult l = Bisect(l_curve, llo, lhi, tolerance, "L2");
  return PolicyPair{scalar(k.response), scalar(l.response),
                    scalar(k.opponent), scalar(l.opponent)};
}

}  // namespace lqmftg
