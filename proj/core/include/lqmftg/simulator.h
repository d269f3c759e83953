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

// Stochastic rollouts of the game under linear policies.
//
// The mean-field simulator follows one representative state x_t together
// with its conditional mean xbar_t given the common noise. Under linear
// policies xbar_t obeys its own recursion
//
//   xbar_{t+1} = Atil xbar_t + Btil1 ubar1_t + Btil2 ubar2_t + e0_{t+1},
//
// so it is propagated exactly rather than estimated. The N-agent simulator
// couples N states through their empirical means.
//
// Randomness: every noise source (initial common, initial idiosyncratic,
// step common, step idiosyncratic) draws from its own stream derived from the
// seed, so changing the horizon never reshuffles earlier draws, and the two
// simulators share their common-noise path for equal seeds.

#ifndef LQMFTG_SIMULATOR_H_
#define LQMFTG_SIMULATOR_H_

#include <cstdint>
#include <ostream>
#include <vector>

#include "lqmftg/model.h"

namespace lqmftg {

enum class NoiseSource : std::uint64_t {
  kInitCommon = 0,
  kInitIdio = 1,
  kStepCommon = 2,
  kStepIdio = 3,
};

std::uint64_t NoiseSeed(std::uint64_t seed, NoiseSource source);

struct MkvTrajectory {
  std::vector<Vector> xs;
  std::vector<Vector> xbars;
  std::vector<Vector> u1s;
  std::vector<Vector> u2s;
  std::vector<double> costs;
  double utility = 0.0;  // sum_{t < horizon} gamma^t costs[t]
};

MkvTrajectory SimulateMkv(const Model& model, const PolicyPair& theta,
                          int horizon, std::uint64_t seed);

// Same rollout as SimulateMkv, returning only the utility. Bit-identical to
// SimulateMkv(...).utility.
double SampleMkvUtility(const Model& model, const PolicyPair& theta,
                        int horizon, std::uint64_t seed);

struct NAgentTrajectory {
  int num_agents = 0;
  std::vector<Matrix> states;  // per step, d x N (one column per agent)
  std::vector<Vector> xbars;   // empirical state means
  std::vector<Vector> ubar1s;  // empirical control means
  std::vector<Vector> ubar2s;
  std::vector<double> costs;   // average instantaneous utility
  double utility = 0.0;
};

NAgentTrajectory SimulateNAgent(const Model& model, const PolicyPair& theta,
                                int num_agents, int horizon,
                                std::uint64_t seed);

double SampleNAgentUtility(const Model& model, const PolicyPair& theta,
                           int num_agents, int horizon, std::uint64_t seed);

// Columns: t, x, xbar, u1, u2, c. Vector-valued columns expand to x_0, x_1...
void WriteTrajectoryCsv(const MkvTrajectory& trajectory, std::ostream& out);
// Columns t,xbar,ubar1,ubar2,c (empirical means).
void WriteTrajectoryCsv(const NAgentTrajectory& trajectory, std::ostream& out);

}  // namespace lqmftg

#endif  // LQMFTG_SIMULATOR_H_
