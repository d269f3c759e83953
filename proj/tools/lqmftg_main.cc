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

// Command-line driver.
//
//   lqmftg benchmark       --config FILE [--out DIR]
//   lqmftg optimize        --config FILE [--seed S] [--out DIR] [--repeats N]
//                          [--oracle exact|sampled]
//   lqmftg validate-nagent --config FILE [--ns 10,100,1000] [--seed S]
//   lqmftg simulate        --config FILE [--seed S] [--out DIR]
//
// Exit status: 0 on success, 2 for config errors, 3 for numerical failures.
// Failures print a JSON object to stderr.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lqmftg/config.h"
#include "lqmftg/error.h"
#include "lqmftg/experiment.h"
#include "lqmftg/format.h"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int ReportError(const std::string& code, const std::string& message,
                int status) {
  nlohmann::ordered_json error{{"error", code}, {"message", message},
                               {"exit_code", status}};
  std::cerr << error.dump() << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-gradient learning for linear-quadratic zero-sum "
               "mean-field type games"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> repeats;
  std::string oracle;
  std::vector<int> ns;

  auto* benchmark = app.add_subcommand("benchmark", "Solve the Riccati benchmark");
  auto* optimize = app.add_subcommand("optimize", "Run AG or GDA learning");
  auto* validate = app.add_subcommand(
      "validate-nagent", "Compare N-agent and mean-field utilities");
  auto* simulate = app.add_subcommand("simulate", "Dump one trajectory");
  for (CLI::App* sub : {benchmark, optimize, validate, simulate}) {
    sub->add_option("--config", config_path, "Config file")->required();
    sub->add_option("--seed", seed, "Master seed (overrides config)");
    sub->add_option("--out", out, "Output directory (overrides config)");
  }
  optimize->add_option("--repeats", repeats, "Repeats (overrides config)")
      ->check(CLI::PositiveNumber);
  optimize->add_option("--oracle", oracle, "Gradient oracle (overrides config)")
      ->check(CLI::IsMember({"exact", "sampled"}));
  validate->add_option("--ns", ns, "Population sizes (overrides config)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kConfigError;
  }

  lqmftg::ConfigOverrides overrides;
  overrides.seed = seed;
  overrides.output_dir = out;
  overrides.repeats = repeats;
  if (!oracle.empty()) {
    overrides.oracle = oracle == "exact" ? lqmftg::OracleKind::kExact
                                         : lqmftg::OracleKind::kSampled;
  }

  lqmftg::ExperimentConfig cfg;
  try {
    cfg = lqmftg::LoadConfig(config_path, overrides);
  } catch (const lqmftg::Error& e) {
    return ReportError(std::string(lqmftg::ErrorCodeName(e.code())), e.what(),
                       kConfigError);
  }

  try {
    if (*benchmark) {
      std::cout << lqmftg::BenchmarkJson(lqmftg::RunBenchmark(cfg));
    } else if (*optimize) {
      const lqmftg::ExperimentResult result = lqmftg::RunExperiment(cfg);
      std::cout << "final_mean_rel_err "
                << lqmftg::FormatDouble(result.final_mean_rel_err) << '\n';
    } else if (*validate) {
      const lqmftg::NAgentValidation v = lqmftg::RunNAgentValidation(
          cfg, ns.empty() ? cfg.validation.Ns : ns);
      std::cout << "mkv_mean " << lqmftg::FormatDouble(v.mkv_mean) << '\n';
      for (const auto& row : v.rows) {
        std::cout << "N=" << row.agents
                  << " rel_gap " << lqmftg::FormatDouble(row.rel_gap) << " +- "
                  << lqmftg::FormatDouble(row.gap_stderr) << '\n';
      }
    } else if (*simulate) {
      lqmftg::RunSimulation(cfg);
    }
  } catch (const lqmftg::Error& e) {
    return ReportError(std::string(lqmftg::ErrorCodeName(e.code())), e.what(),
                       e.code() == lqmftg::ErrorCode::kIoError
                           ? kConfigError
                           : kNumericalError);
  } catch (const std::exception& e) {
    return ReportError("InternalError", e.what(), kNumericalError);
  }
  return 0;
}
