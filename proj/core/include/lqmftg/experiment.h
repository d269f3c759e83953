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

// End-to-end experiment workflows and their on-disk artifacts.
//
// RunExperiment writes into cfg.output_dir:
//   benchmark.json    Riccati solution, theta* and C(theta*)
//   run_<r>.csv       one optimizer log per repeat
//   convergence.csv   k, mean/min/max relative error across repeats
//   summary.json      per-run final theta and error, benchmark, settings
//   timing.json       wall-clock times (the only non-reproducible file)

#ifndef LQMFTG_EXPERIMENT_H_
#define LQMFTG_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lqmftg/config.h"
#include "lqmftg/optimizers.h"
#include "lqmftg/riccati.h"
#include "lqmftg/value.h"

namespace lqmftg {

struct BenchmarkResult {
  RiccatiSolution riccati;
  PolicyPair theta_star;
  ValueSolution value;
};

BenchmarkResult ComputeBenchmark(const Model& model);
std::string BenchmarkJson(const BenchmarkResult& benchmark);

// Seed of repeat r.
std::uint64_t RepeatSeed(std::uint64_t master_seed, int repeat);

// theta0, or theta0 moved by a uniform point on the configured sphere.
PolicyPair InitialPolicyForRepeat(const ExperimentConfig& cfg,
                                  std::uint64_t repeat_seed);

struct ExperimentResult {
  BenchmarkResult benchmark;
  std::vector<RunLog> runs;
  // Mean over repeats of the last logged relative error.
  double final_mean_rel_err = 0.0;
};

ExperimentResult RunExperiment(const ExperimentConfig& cfg);

// Writes benchmark.json only.
BenchmarkResult RunBenchmark(const ExperimentConfig& cfg);

struct NAgentRow {
  int agents = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  // |mean J^N - mean J| / |mean J| and the standard error of the paired
  // difference, both relative to |mean J|.
  double rel_gap = 0.0;
  double gap_stderr = 0.0;
};

struct NAgentValidation {
  double mkv_mean = 0.0;
  double mkv_stderr = 0.0;
  std::vector<NAgentRow> rows;
};

// Sample s uses seed DeriveSeed(master_seed, s) for the mean-field and every
// N-agent rollout, so all of them share one common-noise path. Writes
// nagent.csv with columns N,mean,stderr,rel_gap,gap_stderr.
NAgentValidation RunNAgentValidation(const ExperimentConfig& cfg,
                                     const std::vector<int>& Ns);

// Writes trajectory.csv for one rollout seeded with master_seed.
void RunSimulation(const ExperimentConfig& cfg);

}  // namespace lqmftg

#endif  // LQMFTG_EXPERIMENT_H_
