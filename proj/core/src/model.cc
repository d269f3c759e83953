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

#include <cmath>
#include <sstream>
#include <utility>

#include "lqmftg/error.h"
#include "stage_cost.h"

namespace lqmftg {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::kBadDiscount: return "BadDiscount";
    case ErrorCode::kInvalidNoise: return "InvalidNoise";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNonStabilizingSolution: return "NonStabilizingSolution";
    case ErrorCode::kSingularR: return "SingularR";
    case ErrorCode::kIndefiniteInnerProblem: return "IndefiniteInnerProblem";
    case ErrorCode::kNoRoot: return "NoRoot";
    case ErrorCode::kDegenerateProblem: return "DegenerateProblem";
    case ErrorCode::kNotStabilizing: return "NotStabilizing";
    case ErrorCode::kDegenerateDraw: return "DegenerateDraw";
    case ErrorCode::kLeftStabilizingSet: return "LeftStabilizingSet";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBenchmarkZero: return "BenchmarkZero";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kCrossFieldError: return "CrossFieldError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool IsConfigError(ErrorCode code) {
  return code == ErrorCode::kParseError || code == ErrorCode::kSchemaError ||
         code == ErrorCode::kCrossFieldError;
}

// ---------------------------------------------------------------------------
// Distribution

Distribution Distribution::Uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::kInvalidNoise, "uniform(a, b) needs finite a < b");
  }
  return Distribution(DistributionKind::kUniform, lo, hi);
}

Distribution Distribution::Gaussian(double mean, double variance) {
  if (!(variance >= 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
    throw Error(ErrorCode::kInvalidNoise,
                "gaussian(mean, variance) needs a finite non-negative variance");
  }
  return Distribution(DistributionKind::kGaussian, mean, variance);
}

Distribution Distribution::PointMass(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidNoise, "point mass must be finite");
  }
  return Distribution(DistributionKind::kPointMass, value, 0.0);
}

double Distribution::CoordinateMean() const {
  switch (kind_) {
    case DistributionKind::kUniform: return 0.5 * (first_ + second_);
    case DistributionKind::kGaussian: return first_;
    case DistributionKind::kPointMass: return first_;
  }
  return 0.0;
}

double Distribution::CoordinateVariance() const {
  switch (kind_) {
    case DistributionKind::kUniform: {
      const double width = second_ - first_;
      return width * width / 12.0;
    }
    case DistributionKind::kGaussian: return second_;
    case DistributionKind::kPointMass: return 0.0;
  }
  return 0.0;
}

Vector Distribution::Mean(int dim) const {
  return Vector::Constant(dim, CoordinateMean());
}

Matrix Distribution::Covariance(int dim) const {
  return CoordinateVariance() * Matrix::Identity(dim, dim);
}

Matrix Distribution::SecondMoment(int dim) const {
  const Vector m = Mean(dim);
  return Covariance(dim) + m * m.transpose();
}

std::string Distribution::ToString() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case DistributionKind::kUniform:
      os << "uniform(" << first_ << ", " << second_ << ")";
      break;
    case DistributionKind::kGaussian:
      os << "gaussian(" << first_ << ", " << second_ << ")";
      break;
    case DistributionKind::kPointMass:
      os << "point(" << first_ << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr double kPivotTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-12;

void CheckShape(const Matrix& m, int rows, int cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " is " << m.rows() << "x" << m.cols() << ", expected "
       << rows << "x" << cols;
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " has non-finite entries");
  }
}

bool IsSymmetric(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <=
         kSymmetryTolerance * (1.0 + m.cwiseAbs().maxCoeff());
}

void CheckSymmetric(const Matrix& m, const char* name) {
  if (!IsSymmetric(m)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be symmetric");
  }
}

// Symmetric factorization; every pivot must exceed the tolerance.
void CheckPositiveDefinite(const Matrix& m, const char* name) {
  if (!IsSymmetric(m)) {
    throw Error(ErrorCode::kNonPositiveDefinite,
                std::string(name) + " is not symmetric");
  }
  const Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() <= kPivotTolerance) {
    throw Error(ErrorCode::kNonPositiveDefinite,
                std::string(name) + " is not positive definite");
  }
}

void CheckZeroMean(const Distribution& dist, const char* name) {
  if (dist.CoordinateMean() != 0.0) {
    throw Error(ErrorCode::kInvalidNoise,
                std::string(name) + " must have mean zero, got " +
                    dist.ToString());
  }
}

// (-1)^i 1/2 R^{-1} B^T.
Matrix HalfGain(int player, const Matrix& R, const Matrix& B) {
  const double sign = player == 1 ? -1.0 : 1.0;
  return sign * 0.5 * R.ldlt().solve(B.transpose());
}

}  // namespace

DerivedParams Validate(const ModelParams& p) {
  const int d = p.state_dim;
  const int l = p.control_dim;
  if (d < 1 || l < 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state and control dimensions must be positive");
  }
  CheckShape(p.A, d, d, "A");
  CheckShape(p.Abar, d, d, "Abar");
  CheckShape(p.B1, d, l, "B1");
  CheckShape(p.B1bar, d, l, "B1bar");
  CheckShape(p.B2, d, l, "B2");
  CheckShape(p.B2bar, d, l, "B2bar");
  CheckShape(p.Q, d, d, "Q");
  CheckShape(p.Qbar, d, d, "Qbar");
  CheckShape(p.R1, l, l, "R1");
  CheckShape(p.R1bar, l, l, "R1bar");
  CheckShape(p.R2, l, l, "R2");
  CheckShape(p.R2bar, l, l, "R2bar");

  if (!(p.gamma > 0.0 && p.gamma < 1.0)) {
    std::ostringstream os;
    os << "gamma must lie in (0, 1), got " << p.gamma;
    throw Error(ErrorCode::kBadDiscount, os.str());
  }

  CheckSymmetric(p.Q, "Q");
  CheckSymmetric(p.Qbar, "Qbar");
  CheckPositiveDefinite(p.R1, "R1");
  CheckPositiveDefinite(p.R2, "R2");

  DerivedParams out;
  out.Atil = p.A + p.Abar;
  out.Btil1 = p.B1 + p.B1bar;
  out.Btil2 = p.B2 + p.B2bar;
  out.Qtil = p.Q + p.Qbar;
  out.Rtil1 = p.R1 + p.R1bar;
  out.Rtil2 = p.R2 + p.R2bar;
  CheckPositiveDefinite(out.Rtil1, "R1 + R1bar");
  CheckPositiveDefinite(out.Rtil2, "R2 + R2bar");

  CheckZeroMean(p.noise.step_common, "step_common");
  CheckZeroMean(p.noise.step_idio, "step_idio");

  out.Gamma1 = HalfGain(1, p.R1, p.B1);
  out.Gamma2 = HalfGain(2, p.R2, p.B2);
  out.Lambda1 = HalfGain(1, out.Rtil1, out.Btil1);
  out.Lambda2 = HalfGain(2, out.Rtil2, out.Btil2);

  // Xi_i from its own formula rather than Lambda_i - Gamma_i, so that the
  // identity Lambda_i = Gamma_i + Xi_i stays a genuine check.
  const auto xi = [](int player, const Matrix& R, const Matrix& Rbar,
                     const Matrix& Rtil, const Matrix& Bbar,
                     const Matrix& Btil) {
    const double sign = player == 1 ? -1.0 : 1.0;
    const Matrix inner =
        Bbar.transpose() - Rbar * Rtil.ldlt().solve(Btil.transpose());
    return Matrix(sign * 0.5 * R.ldlt().solve(inner));
  };
  out.Xi1 = xi(1, p.R1, p.R1bar, out.Rtil1, p.B1bar, out.Btil1);
  out.Xi2 = xi(2, p.R2, p.R2bar, out.Rtil2, p.B2bar, out.Btil2);
  return out;
}

Model::Model(ModelParams params)
    : params_(std::move(params)), derived_(Validate(params_)) {}

// ---------------------------------------------------------------------------
// Policies

PolicyPair PolicyPair::Zero(int state_dim, int control_dim) {
  const Matrix zero = Matrix::Zero(control_dim, state_dim);
  return PolicyPair{zero, zero, zero, zero};
}

bool PolicyPair::AllFinite() const {
  return K1.allFinite() && L1.allFinite() && K2.allFinite() &&
         L2.allFinite();
}

void CheckPolicyDims(const Model& model, const PolicyPair& theta) {
  const int l = model.control_dim();
  const int d = model.state_dim();
  for (const Matrix* m : {&theta.K1, &theta.L1, &theta.K2, &theta.L2}) {
    if (m->rows() != l || m->cols() != d) {
      std::ostringstream os;
      os << "policy gain is " << m->rows() << "x" << m->cols()
         << ", expected " << l << "x" << d;
      throw Error(ErrorCode::kDimensionMismatch, os.str());
    }
  }
}

Matrix DeviationClosedLoop(const Model& model, const Matrix& K1,
                           const Matrix& K2) {
  const ModelParams& p = model.params();
  return p.A - p.B1 * K1 + p.B2 * K2;
}

Matrix MeanClosedLoop(const Model& model, const Matrix& L1, const Matrix& L2) {
  const DerivedParams& q = model.derived();
  return q.Atil - q.Btil1 * L1 + q.Btil2 * L2;
}

double SpectralNorm(const Matrix& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

bool InStabilizingSet(const Model& model, const PolicyPair& theta) {
  CheckPolicyDims(model, theta);
  const double gamma = model.gamma();
  const double ny = SpectralNorm(DeviationClosedLoop(model, theta.K1, theta.K2));
  const double nz = SpectralNorm(MeanClosedLoop(model, theta.L1, theta.L2));
  return gamma * ny * ny < 1.0 && gamma * nz * nz < 1.0;
}

Controls ControlFromPolicy(const PolicyPair& theta, const Vector& x,
                           const Vector& xbar) {
  if (x.size() != theta.K1.cols() || xbar.size() != theta.K1.cols() ||
      theta.L1.cols() != x.size() || theta.K2.cols() != x.size() ||
      theta.L2.cols() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state size does not match policy gains");
  }
  const Vector y = x - xbar;
  return Controls{-theta.K1 * y - theta.L1 * xbar,
                  theta.K2 * y + theta.L2 * xbar};
}

double InstantaneousCost(const Model& model, const Vector& x,
                         const Vector& xbar, const Vector& u1,
                         const Vector& ubar1, const Vector& u2,
                         const Vector& ubar2) {
  const ModelParams& p = model.params();
  const DerivedParams& q = model.derived();
  if (x.size() != p.state_dim || xbar.size() != p.state_dim ||
      u1.size() != p.control_dim || ubar1.size() != p.control_dim ||
      u2.size() != p.control_dim || ubar2.size() != p.control_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "cost arguments have wrong size");
  }
  return internal::StageCost(p.Q, q.Qtil, p.R1, q.Rtil1, p.R2, q.Rtil2, x,
                             xbar, u1, ubar1, u2, ubar2);
}

ModelParams ReferenceParams() {
  const auto s = [](double v) { return Matrix::Constant(1, 1, v); };
  ModelParams p;
  p.state_dim = 1;
  p.control_dim = 1;
  p.A = s(0.4);
  p.Abar = s(0.4);
  p.B1 = s(0.4);
  p.B1bar = s(0.4);
  p.B2 = s(0.3);
  p.B2bar = s(0.3);
  p.Q = s(0.4);
  p.Qbar = s(0.4);
  p.R1 = s(0.4);
  p.R1bar = s(0.4);
  p.R2 = s(0.4);
  p.R2bar = s(0.4);
  p.gamma = 0.9;
  p.noise.init_common = Distribution::Uniform(-1.0, 1.0);
  p.noise.init_idio = Distribution::Uniform(-1.0, 1.0);
  p.noise.step_common = Distribution::Gaussian(0.0, 0.01);
  p.noise.step_idio = Distribution::Gaussian(0.0, 0.01);
  return p;
}

}  // namespace lqmftg
