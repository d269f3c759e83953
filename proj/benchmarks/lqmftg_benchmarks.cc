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

// Microbenchmarks for the solvers, the exact gradient and the samplers.
//
//   ./build/benchmarks/lqmftg_benchmarks --benchmark_filter=Lyapunov

#include <benchmark/benchmark.h>

#include <random>

#include "lqmftg/riccati.h"
#include "lqmftg/simulator.h"
#include "lqmftg/value.h"
#include "lqmftg/zo_estimator.h"

namespace lqmftg {
namespace {

// The reference coefficients on every coordinate plus a small random coupling.
ModelParams ScaledReference(int d) {
  const ModelParams ref = ReferenceParams();
  std::mt19937_64 rng(static_cast<std::uint64_t>(d));
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  const auto lift = [&](const Matrix& scalar, bool couple) {
    Matrix m = scalar(0, 0) * Matrix::Identity(d, d);
    if (couple) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += u(rng) / d;
    }
    return m;
  };
  ModelParams p = ref;
  p.state_dim = d;
  p.control_dim = d;
  p.A = lift(ref.A, true);
  p.Abar = lift(ref.Abar, true);
  p.B1 = lift(ref.B1, true);
  p.B1bar = lift(ref.B1bar, true);
  p.B2 = lift(ref.B2, true);
  p.B2bar = lift(ref.B2bar, true);
  p.Q = lift(ref.Q, false);
  p.Qbar = lift(ref.Qbar, false);
  p.R1 = lift(ref.R1, false);
  p.R1bar = lift(ref.R1bar, false);
  p.R2 = lift(ref.R2, false);
  p.R2bar = lift(ref.R2bar, false);
  return p;
}

void BM_SolveRiccati(benchmark::State& state) {
  const Model model(ScaledReference(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(SolveRiccati(model));
}
BENCHMARK(BM_SolveRiccati)->Arg(1)->Arg(8)->Arg(32);

void BM_ExactGradient(benchmark::State& state) {
  const Model model(ScaledReference(static_cast<int>(state.range(0))));
  const PolicyPair star = NashPolicy(model, SolveRiccati(model));
  for (auto _ : state) benchmark::DoNotOptimize(ExactGradient(model, star));
}
BENCHMARK(BM_ExactGradient)->Arg(1)->Arg(8)->Arg(32);

void BM_SolveDiscountedLyapunov(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix M(d, d);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = u(rng);
  M *= 0.5 / M.norm();
  const Matrix S = Matrix::Identity(d, d);
  for (auto _ : state) benchmark::DoNotOptimize(SolveDiscountedLyapunov(M, S, 0.9));
}
BENCHMARK(BM_SolveDiscountedLyapunov)->Arg(8)->Arg(32)->Arg(64);

void BM_SampleMkvUtility(benchmark::State& state) {
  const Model model(ReferenceParams());
  const PolicyPair star = NashPolicy(model, SolveRiccati(model));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SampleMkvUtility(model, star, 50, seed++));
  }
}
BENCHMARK(BM_SampleMkvUtility);

void BM_SampleNAgentUtility(benchmark::State& state) {
  const Model model(ReferenceParams());
  const PolicyPair star = NashPolicy(model, SolveRiccati(model));
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SampleNAgentUtility(model, star, n, 50, seed++));
  }
}
BENCHMARK(BM_SampleNAgentUtility)->Arg(10)->Arg(1000);

void BM_EstimateGradient(benchmark::State& state) {
  const Model model(ReferenceParams());
  const PolicyPair zero = PolicyPair::Zero(1, 1);
  EstimatorConfig cfg;
  cfg.perturbations = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(EstimateGradient(model, zero, Player::kOne, cfg));
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateGradient)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace lqmftg

BENCHMARK_MAIN();
