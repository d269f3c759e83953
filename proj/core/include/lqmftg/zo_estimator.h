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

// Sample-based gradient estimation for one player. The estimator treats the
// mean-field simulator as a black box: it perturbs the player's (K, L) on
// spheres of radius tau, collects one truncated utility sample per
// perturbation and returns
//
//   grad_K ~ (D / tau^2) (1/M) sum_i C_i v_K,i,
//   grad_L ~ (D / tau^2) (1/M) sum_i C_i v_L,i.

#ifndef LQMFTG_ZO_ESTIMATOR_H_
#define LQMFTG_ZO_ESTIMATOR_H_

#include <cstdint>
#include <functional>

#include "lqmftg/model.h"

namespace lqmftg {

enum class Player { kOne = 1, kTwo = 2 };

enum class SmoothingConstant {
  // D = l * d, the number of perturbed entries of each gain block.
  kParameterCount,
  // D = d, the state dimension. Agrees with kParameterCount when d = l = 1.
  kStateDim,
};

struct EstimatorConfig {
  int perturbations = 10000;  // M
  int horizon = 50;           // truncation length
  double radius = 0.1;        // tau
  std::uint64_t seed = 0;
  SmoothingConstant smoothing = SmoothingConstant::kParameterCount;
  // Worker threads for the M simulator calls; results do not depend on it.
  int threads = 1;
};

void ValidateEstimatorConfig(const EstimatorConfig& config);

// Uniform point on the radius-tau sphere in R^dim: a normalized Gaussian
// draw. Redraws an all-zero Gaussian vector, failing after 100 attempts.
Vector SphereSample(int dim, double radius, Xoshiro256pp& rng);

struct PlayerGradient {
  Matrix gK;
  Matrix gL;
};

// Utility sample at a perturbed policy. `seed` identifies the sample.
using UtilityOracle =
    std::function<double(const PolicyPair& theta, std::uint64_t seed)>;

// Estimate with an arbitrary utility oracle, e.g. a known test surface.
PlayerGradient EstimateGradient(const UtilityOracle& oracle,
                                const PolicyPair& theta, Player player,
                                const EstimatorConfig& config);

// Estimate with the mean-field simulator as the oracle.
PlayerGradient EstimateGradient(const Model& model, const PolicyPair& theta,
                                Player player, const EstimatorConfig& config);

}  // namespace lqmftg

#endif  // LQMFTG_ZO_ESTIMATOR_H_
