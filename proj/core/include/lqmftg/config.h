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

// Experiment configuration files.
//
// The format is flat `key = value` lines grouped under [section] headers;
// `#` starts a comment. Sections:
//
//   [experiment]  method (AG|GDA), oracle (exact|sampled), repeats,
//                 master_seed, output_dir, threads, perturb_initial_radius
//   [model]       state_dim, control_dim, A, Abar, B1, B1bar, B2, B2bar,
//                 Q, Qbar, R1, R1bar, R2, R2bar, gamma
//   [noise]       init_common, init_idio, step_common, step_idio
//   [optimizer]   T1, T2, T, eta1, eta2, theta0_K1, theta0_L1, theta0_K2,
//                 theta0_L2, log_every, shrink_on_exit
//   [estimator]   perturbations, horizon, radius, smoothing, threads
//   [validation]  Ns, samples, horizon, policy (nash|theta0)
//   [simulation]  horizon, agents, policy (nash|theta0)
//
// Matrices are written row by row, rows separated by ';' and entries by
// spaces or commas ("1 0; 0 1"); a scalar is a 1 x 1 matrix. Distributions
// are uniform(lo, hi), gaussian(mean, variance) or point(value).
//
// Every [model] field except the dimensions (default 1) is required, and so
// are experiment.method and experiment.oracle. Optimizer, estimator and
// noise fields default to the reference setting (T1 = 10, T2 = 200,
// T = 2000, eta = 0.1, theta0 = 0; M = 10000, horizon 50, tau = 0.1;
// U[-1, 1] initial noise and N(0, 0.01) step noise). The [estimator] section
// is required when oracle = sampled and ignored otherwise.

#ifndef LQMFTG_CONFIG_H_
#define LQMFTG_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lqmftg/model.h"
#include "lqmftg/optimizers.h"

namespace lqmftg {

enum class PolicyChoice { kNash, kTheta0 };

struct ValidationConfig {
  std::vector<int> Ns = {10, 100, 1000};
  int samples = 20000;
  int horizon = 50;
  PolicyChoice policy = PolicyChoice::kNash;
};

struct SimulationConfig {
  int horizon = 50;
  int agents = 0;  // 0 selects the mean-field simulator
  PolicyChoice policy = PolicyChoice::kNash;
};

struct ExperimentConfig {
  ModelParams model;
  OptimizerConfig optimizer;  // carries method, oracle and estimator
  bool has_estimator = false;
  int repeats = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  int threads = 1;
  // > 0 perturbs theta0 per repeat by a uniform point on this sphere.
  double perturb_initial_radius = 0.0;
  ValidationConfig validation;
  SimulationConfig simulation;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> repeats;
  std::optional<OracleKind> oracle;
};

ExperimentConfig ParseConfig(std::string_view text,
                             const ConfigOverrides& overrides = {});
ExperimentConfig LoadConfig(const std::filesystem::path& path,
                            const ConfigOverrides& overrides = {});

// Value syntax helpers; FormatMatrix output parses back with ParseMatrix.
std::string FormatMatrix(const Matrix& m);
Matrix ParseMatrix(std::string_view text);
Distribution ParseDistribution(std::string_view text);

}  // namespace lqmftg

#endif  // LQMFTG_CONFIG_H_
