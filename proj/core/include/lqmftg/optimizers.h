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

// Alternating-gradient (AG) and gradient-descent-ascent (GDA) learning for the
// zero-sum game. Player 1 descends on C, player 2 ascends.
//
// Global iteration k counts player-1 steps. In AG player 2 moves once every
// T1 iterations, right after the inner loop; in GDA both move every
// iteration from the same pre-update pair.

#ifndef LQMFTG_OPTIMIZERS_H_
#define LQMFTG_OPTIMIZERS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lqmftg/model.h"
#include "lqmftg/zo_estimator.h"

namespace lqmftg {

enum class Method { kAg, kGda };
enum class OracleKind { kExact, kSampled };

const char* MethodName(Method method);
const char* OracleKindName(OracleKind kind);

struct OptimizerConfig {
  Method method = Method::kGda;
  int T1 = 10;
  int T2 = 200;
  int T = 2000;
  double eta1 = 0.1;
  double eta2 = 0.1;
  // Empty gains mean the zero policy.
  PolicyPair theta0;
  OracleKind oracle = OracleKind::kExact;
  EstimatorConfig estimator;  // used when oracle == kSampled
  int log_every = 1;
  // Halve a step (up to 20 times) instead of halting when the tentative
  // iterate leaves the stabilizing set.
  bool shrink_on_exit = false;
  // GDA only: evaluate player 2's gradient before player 1's.
  bool gda_player2_first = false;
};

void ValidateOptimizerConfig(const OptimizerConfig& config);

// Player gradient at theta; `seed` individualizes sampled estimates.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;
  virtual PlayerGradient Gradient(const PolicyPair& theta, Player player,
                                  std::uint64_t seed) = 0;
  virtual bool exact() const = 0;
};

class ExactOracle final : public GradientOracle {
 public:
  explicit ExactOracle(const Model& model) : model_(model) {}
  PlayerGradient Gradient(const PolicyPair& theta, Player player,
                          std::uint64_t seed) override;
  bool exact() const override { return true; }

 private:
  const Model& model_;
};

class SampledOracle final : public GradientOracle {
 public:
  SampledOracle(const Model& model, EstimatorConfig config)
      : model_(model), config_(config) {}
  PlayerGradient Gradient(const PolicyPair& theta, Player player,
                          std::uint64_t seed) override;
  bool exact() const override { return false; }

 private:
  const Model& model_;
  EstimatorConfig config_;
};

std::unique_ptr<GradientOracle> MakeOracle(const Model& model,
                                           const OptimizerConfig& config);

// |current - star| / |star|. Throws kBenchmarkZero when star == 0.
double RelativeError(double current, double star);

enum class Termination { kCompleted, kLeftStabilizingSet, kNonFinite };

const char* TerminationName(Termination termination);

struct IterationRecord {
  long k = 0;
  PolicyPair theta;
  // Exact evaluations at theta; NaN outside the stabilizing set.
  double C = 0.0;
  double gradnorm_K1 = 0.0;
  double gradnorm_L1 = 0.0;
  double gradnorm_K2 = 0.0;
  double gradnorm_L2 = 0.0;
  // NaN without a benchmark.
  double rel_err = 0.0;
  double wall_seconds = 0.0;
};

struct RunLog {
  std::vector<IterationRecord> records;
  PolicyPair final_theta;
  long iterations = 0;
  Termination termination = Termination::kCompleted;
  std::string diagnostic;
  double wall_seconds = 0.0;
};

// `benchmark` is used for reporting only. `seed` feeds the sampled oracle:
// the estimate for player i at global iteration k uses
// DeriveSeed(DeriveSeed(seed, k), i).
RunLog RunAg(const Model& model, const OptimizerConfig& config,
             const std::optional<PolicyPair>& benchmark,
             std::uint64_t seed = 0);
RunLog RunGda(const Model& model, const OptimizerConfig& config,
              const std::optional<PolicyPair>& benchmark,
              std::uint64_t seed = 0);
RunLog RunOptimizer(const Model& model, const OptimizerConfig& config,
                    const std::optional<PolicyPair>& benchmark,
                    std::uint64_t seed = 0);

// Header k,K1,L1,K2,L2,C,gradnorm_K1,...,rel_err. Matrix gains expand to
// K1_r_c columns in row-major order. Wall time is not written.
void WriteRunLogCsv(const RunLog& log, std::ostream& out);

}  // namespace lqmftg

#endif  // LQMFTG_OPTIMIZERS_H_
