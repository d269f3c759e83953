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

#include "lqmftg/optimizers.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "lqmftg/error.h"
#include "lqmftg/format.h"
#include "lqmftg/value.h"

namespace lqmftg {
namespace {

constexpr int kMaxHalvings = 20;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

PolicyPair InitialPolicy(const Model& model, const OptimizerConfig& config) {
  if (config.theta0.K1.size() == 0) {
    return PolicyPair::Zero(model.state_dim(), model.control_dim());
  }
  CheckPolicyDims(model, config.theta0);
  return config.theta0;
}

std::uint64_t CallSeed(std::uint64_t seed, long k, Player player) {
  return DeriveSeed(DeriveSeed(seed, static_cast<std::uint64_t>(k)),
                    static_cast<std::uint64_t>(player));
}

class Runner {
 public:
  Runner(const Model& model, const OptimizerConfig& config,
         const std::optional<PolicyPair>& benchmark, std::uint64_t seed)
      : model_(model),
        config_(config),
        oracle_(MakeOracle(model, config)),
        seed_(seed),
        start_(Clock::now()) {
    ValidateOptimizerConfig(config);
    if (benchmark) c_star_ = ExactUtility(model, *benchmark).C;
    log_.final_theta = InitialPolicy(model, config);
  }

  RunLog RunAg() {
    PolicyPair& theta = log_.final_theta;
    Record(0, theta);
    long k = 0;
    for (int t2 = 1; t2 <= config_.T2; ++t2) {
      for (int t1 = 1; t1 <= config_.T1; ++t1) {
        ++k;
        if (!Guard(theta)) return Finish(k - 1);
        PlayerGradient g1 = oracle_->Gradient(theta, Player::kOne,
                                              CallSeed(seed_, k, Player::kOne));
        PolicyPair next = theta;
        if (!Step(theta, next, &g1, config_.eta1, nullptr, 0.0)) {
          return Finish(k - 1);
        }
        theta = std::move(next);
        if (t1 < config_.T1) MaybeRecord(k, theta);
      }
      if (!Guard(theta)) return Finish(k);
      PlayerGradient g2 = oracle_->Gradient(theta, Player::kTwo,
                                            CallSeed(seed_, k, Player::kTwo));
      PolicyPair next = theta;
      if (!Step(theta, next, nullptr, 0.0, &g2, config_.eta2)) {
        return Finish(k);
      }
      theta = std::move(next);
      MaybeRecord(k, theta);
    }
    return Finish(k);
  }

  RunLog RunGda() {
    PolicyPair& theta = log_.final_theta;
    Record(0, theta);
    for (long k = 1; k <= config_.T; ++k) {
      if (!Guard(theta)) return Finish(k - 1);
      PlayerGradient g1, g2;
      if (config_.gda_player2_first) {
        g2 = oracle_->Gradient(theta, Player::kTwo,
                               CallSeed(seed_, k, Player::kTwo));
        g1 = oracle_->Gradient(theta, Player::kOne,
                               CallSeed(seed_, k, Player::kOne));
      } else {
        g1 = oracle_->Gradient(theta, Player::kOne,
                               CallSeed(seed_, k, Player::kOne));
        g2 = oracle_->Gradient(theta, Player::kTwo,
                               CallSeed(seed_, k, Player::kTwo));
      }
      PolicyPair next = theta;
      if (!Step(theta, next, &g1, config_.eta1, &g2, config_.eta2)) {
        return Finish(k - 1);
      }
      theta = std::move(next);
      MaybeRecord(k, theta);
    }
    return Finish(config_.T);
  }

 private:
  // Exact oracles cannot be evaluated outside the stabilizing set.
  bool Guard(const PolicyPair& theta) {
    if (oracle_->exact() && !InStabilizingSet(model_, theta)) {
      log_.termination = Termination::kLeftStabilizingSet;
      log_.diagnostic = "iterate outside the stabilizing set";
      return false;
    }
    return true;
  }

  // Writes theta - eta1 g1 (player 1) and theta + eta2 g2 (player 2) into
  // next. Returns false and sets the termination reason on failure.
  bool Step(const PolicyPair& theta, PolicyPair& next, const PlayerGradient* g1,
            double eta1, const PlayerGradient* g2, double eta2) {
    double scale = 1.0;
    for (int halving = 0;; ++halving) {
      if (g1 != nullptr) {
        next.K1 = theta.K1 - (scale * eta1) * g1->gK;
        next.L1 = theta.L1 - (scale * eta1) * g1->gL;
      }
      if (g2 != nullptr) {
        next.K2 = theta.K2 + (scale * eta2) * g2->gK;
        next.L2 = theta.L2 + (scale * eta2) * g2->gL;
      }
      if (!next.AllFinite()) {
        log_.termination = Termination::kNonFinite;
        log_.diagnostic = "parameters became non-finite";
        return false;
      }
      if (!oracle_->exact() || InStabilizingSet(model_, next)) return true;
      if (!config_.shrink_on_exit || halving == kMaxHalvings) {
        log_.termination = Termination::kLeftStabilizingSet;
        log_.diagnostic = "step left the stabilizing set";
        return false;
      }
      scale *= 0.5;
    }
  }

  void MaybeRecord(long k, const PolicyPair& theta) {
    if (k % config_.log_every == 0) Record(k, theta);
  }

  void Record(long k, const PolicyPair& theta) {
    IterationRecord r;
    r.k = k;
    r.theta = theta;
    r.C = r.gradnorm_K1 = r.gradnorm_L1 = r.gradnorm_K2 = r.gradnorm_L2 =
        r.rel_err = kNaN;
    if (InStabilizingSet(model_, theta)) {
      try {
        const GradientPair g = ExactGradient(model_, theta);
        r.C = g.value.C;
        r.gradnorm_K1 = g.gK1.norm();
        r.gradnorm_L1 = g.gL1.norm();
        r.gradnorm_K2 = g.gK2.norm();
        r.gradnorm_L2 = g.gL2.norm();
        if (c_star_) r.rel_err = RelativeError(r.C, *c_star_);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kBenchmarkZero) throw;
      }
    }
    r.wall_seconds = Seconds(start_);
    log_.records.push_back(std::move(r));
  }

  RunLog Finish(long k) {
    log_.iterations = k;
    if (log_.records.empty() || log_.records.back().k != k) {
      Record(k, log_.final_theta);
    }
    log_.wall_seconds = Seconds(start_);
    return std::move(log_);
  }

  const Model& model_;
  const OptimizerConfig& config_;
  std::unique_ptr<GradientOracle> oracle_;
  std::uint64_t seed_;
  Clock::time_point start_;
  std::optional<double> c_star_;
  RunLog log_;
};

void WriteGainHeader(std::ostream& out, const char* name, const Matrix& m) {
  if (m.size() == 1) {
    out << ',' << name;
    return;
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << ',' << name << '_' << r << '_' << c;
    }
  }
}

void WriteGain(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << ',' << FormatDouble(m(r, c));
    }
  }
}

}  // namespace

const char* MethodName(Method method) {
  return method == Method::kAg ? "AG" : "GDA";
}

const char* OracleKindName(OracleKind kind) {
  return kind == OracleKind::kExact ? "exact" : "sampled";
}

const char* TerminationName(Termination termination) {
  switch (termination) {
    case Termination::kCompleted:
      return "completed";
    case Termination::kLeftStabilizingSet:
      return "left_stabilizing_set";
    case Termination::kNonFinite:
      return "non_finite";
  }
  return "unknown";
}

void ValidateOptimizerConfig(const OptimizerConfig& config) {
  if (config.T1 < 1 || config.T2 < 1 || config.T < 1 || config.log_every < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "iteration counts and log_every must be >= 1");
  }
  if (!(config.eta1 >= 0.0) || !(config.eta2 >= 0.0) ||
      !std::isfinite(config.eta1) || !std::isfinite(config.eta2)) {
    throw Error(ErrorCode::kInvalidArgument,
                "learning rates must be finite and non-negative");
  }
  if (config.oracle == OracleKind::kSampled) {
    ValidateEstimatorConfig(config.estimator);
  }
}

PlayerGradient ExactOracle::Gradient(const PolicyPair& theta, Player player,
                                     std::uint64_t /*seed*/) {
  GradientPair g = ExactGradient(model_, theta);
  if (player == Player::kOne) return {std::move(g.gK1), std::move(g.gL1)};
  return {std::move(g.gK2), std::move(g.gL2)};
}

PlayerGradient SampledOracle::Gradient(const PolicyPair& theta, Player player,
                                       std::uint64_t seed) {
  EstimatorConfig config = config_;
  config.seed = seed;
  return EstimateGradient(model_, theta, player, config);
}

std::unique_ptr<GradientOracle> MakeOracle(const Model& model,
                                           const OptimizerConfig& config) {
  if (config.oracle == OracleKind::kExact) {
    return std::make_unique<ExactOracle>(model);
  }
  return std::make_unique<SampledOracle>(model, config.estimator);
}

double RelativeError(double current, double star) {
  if (star == 0.0) {
    throw Error(ErrorCode::kBenchmarkZero, "benchmark utility is zero");
  }
  return std::abs(current - star) / std::abs(star);
}

RunLog RunAg(const Model& model, const OptimizerConfig& config,
             const std::optional<PolicyPair>& benchmark, std::uint64_t seed) {
  return Runner(model, config, benchmark, seed).RunAg();
}

RunLog RunGda(const Model& model, const OptimizerConfig& config,
              const std::optional<PolicyPair>& benchmark, std::uint64_t seed) {
  return Runner(model, config, benchmark, seed).RunGda();
}

RunLog RunOptimizer(const Model& model, const OptimizerConfig& config,
                    const std::optional<PolicyPair>& benchmark,
                    std::uint64_t seed) {
  return config.method == Method::kAg ? RunAg(model, config, benchmark, seed)
                                      : RunGda(model, config, benchmark, seed);
}

void WriteRunLogCsv(const RunLog& log, std::ostream& out) {
  out << 'k';
  if (!log.records.empty()) {
    const PolicyPair& t = log.records.front().theta;
    WriteGainHeader(out, "K1", t.K1);
    WriteGainHeader(out, "L1", t.L1);
    WriteGainHeader(out, "K2", t.K2);
    WriteGainHeader(out, "L2", t.L2);
  }
  out << ",C,gradnorm_K1,gradnorm_L1,gradnorm_K2,gradnorm_L2,rel_err\n";
  for (const IterationRecord& r : log.records) {
    out << r.k;
    WriteGain(out, r.theta.K1);
    WriteGain(out, r.theta.L1);
    WriteGain(out, r.theta.K2);
    WriteGain(out, r.theta.L2);
    for (double v : {r.C, r.gradnorm_K1, r.gradnorm_L1, r.gradnorm_K2,
                     r.gradnorm_L2, r.rel_err}) {
      out << ',' << FormatDouble(v);
    }
    out << '\n';
  }
}

}  // namespace lqmftg
