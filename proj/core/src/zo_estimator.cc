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

#include "lqmftg/zo_estimator.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "lqmftg/error.h"
#include "lqmftg/simulator.h"

namespace lqmftg {
namespace {

constexpr int kMaxRedraws = 100;
constexpr std::uint64_t kPerturbationStream = 0;
constexpr std::uint64_t kSampleStream = 1;

}  // namespace

void ValidateEstimatorConfig(const EstimatorConfig& config) {
  if (config.perturbations < 1 || config.horizon < 1 ||
      !(config.radius > 0.0) || !std::isfinite(config.radius) ||
      config.threads < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "estimator needs M >= 1, horizon >= 1, tau > 0, threads >= 1");
  }
}

Vector SphereSample(int dim, double radius, Xoshiro256pp& rng) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    const double norm = v.norm();
    if (norm > 0.0) return (radius / norm) * v;
  }
  throw Error(ErrorCode::kDegenerateDraw,
              "Gaussian draw was zero on every attempt");
}

PlayerGradient EstimateGradient(const UtilityOracle& oracle,
                                const PolicyPair& theta, Player player,
                                const EstimatorConfig& config) {
  ValidateEstimatorConfig(config);
  const Matrix& K = player == Player::kOne ? theta.K1 : theta.K2;
  const Matrix& L = player == Player::kOne ? theta.L1 : theta.L2;
  const Eigen::Index rows = K.rows();
  const Eigen::Index cols = K.cols();
  const int entries = static_cast<int>(rows * cols);
  const double smoothing_dim = config.smoothing == SmoothingConstant::kStateDim
                                   ? static_cast<double>(cols)
                                   : static_cast<double>(entries);
  const int m = config.perturbations;

  // Perturbations are drawn up front, in index order, from one stream so the
  // result is independent of how the simulator calls are scheduled.
  Xoshiro256pp rng(DeriveSeed(config.seed, kPerturbationStream));
  std::vector<Matrix> vk(m), vl(m);
  for (int i = 0; i < m; ++i) {
    vk[i] = SphereSample(entries, config.radius, rng).reshaped(rows, cols);
    vl[i] = SphereSample(entries, config.radius, rng).reshaped(rows, cols);
  }

  const std::uint64_t sample_root = DeriveSeed(config.seed, kSampleStream);
  std::vector<double> samples(m);
  const auto evaluate = [&](int begin, int end) {
    PolicyPair perturbed = theta;
    Matrix& pk = player == Player::kOne ? perturbed.K1 : perturbed.K2;
    Matrix& pl = player == Player::kOne ? perturbed.L1 : perturbed.L2;
    for (int i = begin; i < end; ++i) {
      pk = K + vk[i];
      pl = L + vl[i];
      samples[i] = oracle(perturbed, DeriveSeed(sample_root, i));
    }
  };

  const int workers = std::min(config.threads, m);
  if (workers <= 1) {
    evaluate(0, m);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(evaluate, static_cast<int>(std::int64_t{m} * w / workers),
                        static_cast<int>(std::int64_t{m} * (w + 1) / workers));
    }
  }

  PlayerGradient out{Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
  for (int i = 0; i < m; ++i) {
    out.gK += samples[i] * vk[i];
    out.gL += samples[i] * vl[i];
  }
  const double scale =
      smoothing_dim / (config.radius * config.radius) / static_cast<double>(m);
  out.gK *= scale;
  out.gL *= scale;
  return out;
}

PlayerGradient EstimateGradient(const Model& model, const PolicyPair& theta,
                                Player player, const EstimatorConfig& config) {
  CheckPolicyDims(model, theta);
  const int horizon = config.horizon;
  return EstimateGradient(
      [&model, horizon](const PolicyPair& perturbed, std::uint64_t seed) {
        return SampleMkvUtility(model, perturbed, horizon, seed);
      },
      theta, player, config);
}

}  // namespace lqmftg
