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

#include "lqmftg/experiment.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lqmftg/error.h"
#include "lqmftg/format.h"
#include "lqmftg/simulator.h"
#include "lqmftg/zo_estimator.h"

namespace lqmftg {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kInitialPointStream = 0;

Json MatrixJson(const Matrix& m) {
  if (m.size() == 1) return m(0, 0);
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json PolicyJson(const PolicyPair& theta) {
  return Json{{"K1", MatrixJson(theta.K1)},
              {"L1", MatrixJson(theta.L1)},
              {"K2", MatrixJson(theta.K2)},
              {"L2", MatrixJson(theta.L2)}};
}

Json BenchmarkToJson(const BenchmarkResult& b) {
  return Json{{"P", MatrixJson(b.riccati.P)},
              {"Pbar", MatrixJson(b.riccati.Pbar)},
              {"residual_P", b.riccati.residual_P},
              {"residual_Pbar", b.riccati.residual_Pbar},
              {"iterations", b.riccati.iterations},
              {"theta_star", PolicyJson(b.theta_star)},
              {"C_star", b.value.C},
              {"Cy_star", b.value.Cy},
              {"Cz_star", b.value.Cz}};
}

std::filesystem::path OutputDir(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + dir.string() + ": " + ec.message());
  }
  return dir;
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

double LastRelErr(const RunLog& log) {
  return log.records.empty() ? std::nan("") : log.records.back().rel_err;
}

std::string ConvergenceCsv(const std::vector<RunLog>& runs) {
  std::map<long, std::vector<double>> by_k;
  for (const RunLog& run : runs) {
    for (const IterationRecord& r : run.records) by_k[r.k].push_back(r.rel_err);
  }
  std::ostringstream out;
  out << "k,mean_rel_err,min_rel_err,max_rel_err,runs\n";
  for (const auto& [k, errs] : by_k) {
    double sum = 0.0;
    for (double e : errs) sum += e;
    const auto [lo, hi] = std::minmax_element(errs.begin(), errs.end());
    out << k << ',' << FormatDouble(sum / static_cast<double>(errs.size()))
        << ',' << FormatDouble(*lo) << ',' << FormatDouble(*hi) << ','
        << errs.size() << '\n';
  }
  return out.str();
}

PolicyPair ChoosePolicy(const ExperimentConfig& cfg, const Model& model,
                        PolicyChoice choice) {
  if (choice == PolicyChoice::kTheta0) return cfg.optimizer.theta0;
  return ComputeBenchmark(model).theta_star;
}

// Runs body(i) for i in [0, n) on up to `threads` workers and rethrows the
// first failure by index.
template <typename Body>
void ParallelFor(int n, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto work = [&](int worker, int workers) {
    for (int i = worker; i < n; i += workers) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

BenchmarkResult ComputeBenchmark(const Model& model) {
  BenchmarkResult b;
  b.riccati = SolveRiccati(model);
  b.theta_star = NashPolicy(model, b.riccati);
  b.value = ExactUtility(model, b.theta_star);
  return b;
}

std::string BenchmarkJson(const BenchmarkResult& benchmark) {
  return BenchmarkToJson(benchmark).dump(2) + "\n";
}

std::uint64_t RepeatSeed(std::uint64_t master_seed, int repeat) {
  return DeriveSeed(master_seed, static_cast<std::uint64_t>(repeat));
}

PolicyPair InitialPolicyForRepeat(const ExperimentConfig& cfg,
                                  std::uint64_t repeat_seed) {
  PolicyPair theta = cfg.optimizer.theta0;
  if (theta.K1.size() == 0) {
    theta = PolicyPair::Zero(cfg.model.state_dim, cfg.model.control_dim);
  }
  if (cfg.perturb_initial_radius <= 0.0) return theta;
  Xoshiro256pp rng(DeriveSeed(repeat_seed, kInitialPointStream));
  const Eigen::Index n = theta.K1.size();
  const Vector v = SphereSample(static_cast<int>(4 * n),
                                cfg.perturb_initial_radius, rng);
  const Eigen::Index r = theta.K1.rows();
  const Eigen::Index c = theta.K1.cols();
  theta.K1 += v.segment(0, n).reshaped(r, c);
  theta.L1 += v.segment(n, n).reshaped(r, c);
  theta.K2 += v.segment(2 * n, n).reshaped(r, c);
  theta.L2 += v.segment(3 * n, n).reshaped(r, c);
  return theta;
}

BenchmarkResult RunBenchmark(const ExperimentConfig& cfg) {
  const Model model(cfg.model);
  BenchmarkResult b = ComputeBenchmark(model);
  WriteFile(OutputDir(cfg) / "benchmark.json", BenchmarkJson(b));
  return b;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  const Model model(cfg.model);
  const std::filesystem::path dir = OutputDir(cfg);
  ExperimentResult result;
  // The benchmark is fixed before any learning starts and only used to
  // report errors.
  result.benchmark = ComputeBenchmark(model);
  WriteFile(dir / "benchmark.json", BenchmarkJson(result.benchmark));

  result.runs.resize(cfg.repeats);
  ParallelFor(cfg.repeats, cfg.threads, [&](int r) {
    const std::uint64_t seed = RepeatSeed(cfg.master_seed, r);
    OptimizerConfig opt = cfg.optimizer;
    opt.theta0 = InitialPolicyForRepeat(cfg, seed);
    result.runs[r] = RunOptimizer(model, opt, result.benchmark.theta_star, seed);
    std::ostringstream csv;
    WriteRunLogCsv(result.runs[r], csv);
    WriteFile(dir / ("run_" + std::to_string(r) + ".csv"), csv.str());
  });

  WriteFile(dir / "convergence.csv", ConvergenceCsv(result.runs));

  double sum = 0.0;
  Json runs = Json::array();
  Json timing = Json::array();
  for (int r = 0; r < cfg.repeats; ++r) {
    const RunLog& log = result.runs[r];
    const double err = LastRelErr(log);
    sum += err;
    runs.push_back(Json{{"repeat", r},
                        {"seed", RepeatSeed(cfg.master_seed, r)},
                        {"iterations", log.iterations},
                        {"termination", TerminationName(log.termination)},
                        {"diagnostic", log.diagnostic},
                        {"final_theta", PolicyJson(log.final_theta)},
                        {"final_C", log.records.back().C},
                        {"final_rel_err", err}});
    timing.push_back(Json{{"repeat", r}, {"wall_seconds", log.wall_seconds}});
  }
  result.final_mean_rel_err = sum / cfg.repeats;

  const OptimizerConfig& o = cfg.optimizer;
  Json settings{{"method", MethodName(o.method)},
                {"oracle", OracleKindName(o.oracle)},
                {"repeats", cfg.repeats},
                {"master_seed", cfg.master_seed},
                {"T1", o.T1},
                {"T2", o.T2},
                {"T", o.T},
                {"eta1", o.eta1},
                {"eta2", o.eta2},
                {"theta0", PolicyJson(InitialPolicyForRepeat(cfg, 0))},
                {"perturb_initial_radius", cfg.perturb_initial_radius}};
  if (o.oracle == OracleKind::kSampled) {
    settings["estimator"] = Json{
        {"perturbations", o.estimator.perturbations},
        {"horizon", o.estimator.horizon},
        {"radius", o.estimator.radius},
        {"smoothing", o.estimator.smoothing == SmoothingConstant::kStateDim
                          ? "state_dim"
                          : "parameter_count"}};
  }
  const Json summary{{"settings", settings},
                     {"benchmark", BenchmarkToJson(result.benchmark)},
                     {"runs", runs},
                     {"final_mean_rel_err", result.final_mean_rel_err}};
  WriteFile(dir / "summary.json", summary.dump(2) + "\n");
  WriteFile(dir / "timing.json", Json{{"runs", timing}}.dump(2) + "\n");
  return result;
}

NAgentValidation RunNAgentValidation(const ExperimentConfig& cfg,
                                     const std::vector<int>& Ns) {
  const Model model(cfg.model);
  const PolicyPair theta = ChoosePolicy(cfg, model, cfg.validation.policy);
  const int samples = cfg.validation.samples;
  const int horizon = cfg.validation.horizon;

  std::vector<double> mkv(samples);
  for (int s = 0; s < samples; ++s) {
    mkv[s] = SampleMkvUtility(model, theta, horizon,
                              DeriveSeed(cfg.master_seed, s));
  }
  const auto moments = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
  };

  NAgentValidation out;
  std::tie(out.mkv_mean, out.mkv_stderr) = moments(mkv);
  const double scale = std::abs(out.mkv_mean);
  out.rows.resize(Ns.size());
  ParallelFor(static_cast<int>(Ns.size()), cfg.threads, [&](int i) {
    std::vector<double> nagent(samples), diff(samples);
    for (int s = 0; s < samples; ++s) {
      nagent[s] = SampleNAgentUtility(model, theta, Ns[i], horizon,
                                      DeriveSeed(cfg.master_seed, s));
      diff[s] = nagent[s] - mkv[s];
    }
    NAgentRow& row = out.rows[i];
    row.agents = Ns[i];
    std::tie(row.mean, row.stderr_mean) = moments(nagent);
    const auto [gap, gap_se] = moments(diff);
    row.rel_gap = scale > 0.0 ? std::abs(gap) / scale : 0.0;
    row.gap_stderr = scale > 0.0 ? gap_se / scale : 0.0;
  });

  std::ostringstream csv;
  csv << "N,mean,stderr,rel_gap,gap_stderr\n";
  for (const NAgentRow& row : out.rows) {
    csv << row.agents << ',' << FormatDouble(row.mean) << ','
        << FormatDouble(row.stderr_mean) << ',' << FormatDouble(row.rel_gap)
        << ',' << FormatDouble(row.gap_stderr) << '\n';
  }
  const std::filesystem::path dir = OutputDir(cfg);
  WriteFile(dir / "nagent.csv", csv.str());
  const Json mkv_json{{"mkv_mean", out.mkv_mean},
                      {"mkv_stderr", out.mkv_stderr},
                      {"samples", samples},
                      {"horizon", horizon},
                      {"theta", PolicyJson(theta)}};
  WriteFile(dir / "nagent.json", mkv_json.dump(2) + "\n");
  return out;
}

void RunSimulation(const ExperimentConfig& cfg) {
  const Model model(cfg.model);
  const PolicyPair theta = ChoosePolicy(cfg, model, cfg.simulation.policy);
  const std::filesystem::path dir = OutputDir(cfg);
  std::ostringstream csv;
  if (cfg.simulation.agents == 0) {
    WriteTrajectoryCsv(
        SimulateMkv(model, theta, cfg.simulation.horizon, cfg.master_seed), csv);
  } else {
    WriteTrajectoryCsv(SimulateNAgent(model, theta, cfg.simulation.agents,
                                      cfg.simulation.horizon, cfg.master_seed),
                       csv);
  }
  WriteFile(dir / "trajectory.csv", csv.str());
}

}  // namespace lqmftg
