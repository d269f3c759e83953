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

#include "lqmftg/simulator.h"

#include <string>

#include "lqmftg/error.h"
#include "lqmftg/format.h"
#include "stage_cost.h"

namespace lqmftg {

std::uint64_t NoiseSeed(std::uint64_t seed, NoiseSource source) {
  return DeriveSeed(seed, static_cast<std::uint64_t>(source));
}

namespace {

// Coefficients copied into (possibly fixed-size) Eigen types. D and L are the
// compile-time state and control sizes, or Eigen::Dynamic.
template <int D, int L>
struct Coefficients {
  using StateMat = Eigen::Matrix<double, D, D>;
  using InputMat = Eigen::Matrix<double, D, L>;
  using GainMat = Eigen::Matrix<double, L, D>;
  using CtrlMat = Eigen::Matrix<double, L, L>;
  using State = Eigen::Matrix<double, D, 1>;
  using Ctrl = Eigen::Matrix<double, L, 1>;

  Coefficients(const Model& model, const PolicyPair& theta) {
    const ModelParams& p = model.params();
    const DerivedParams& q = model.derived();
    A = p.A;
    Abar = p.Abar;
    Atil = q.Atil;
    B1 = p.B1;
    B1bar = p.B1bar;
    B2 = p.B2;
    B2bar = p.B2bar;
    Btil1 = q.Btil1;
    Btil2 = q.Btil2;
    Q = p.Q;
    Qtil = q.Qtil;
    R1 = p.R1;
    Rtil1 = q.Rtil1;
    R2 = p.R2;
    Rtil2 = q.Rtil2;
    K1 = theta.K1;
    L1 = theta.L1;
    K2 = theta.K2;
    L2 = theta.L2;
  }

  StateMat A, Abar, Atil, Q, Qtil;
  InputMat B1, B1bar, B2, B2bar, Btil1, Btil2;
  CtrlMat R1, Rtil1, R2, Rtil2;
  GainMat K1, L1, K2, L2;
};

void CheckRollout(const Model& model, const PolicyPair& theta, int horizon) {
  CheckPolicyDims(model, theta);
  if (horizon < 1) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  }
}

struct NoRecord {
  template <typename... Args>
  void operator()(const Args&...) const {}
};

template <int D, int L, typename Recorder>
double RunMkv(const Model& model, const PolicyPair& theta, int horizon,
              std::uint64_t seed, Recorder&& record) {
  using C = Coefficients<D, L>;
  const C c(model, theta);
  const NoiseSpec& noise = model.params().noise;
  const int d = model.state_dim();
  const int l = model.control_dim();
  const double gamma = model.gamma();

  NoiseStream init_common(NoiseSeed(seed, NoiseSource::kInitCommon));
  NoiseStream init_idio(NoiseSeed(seed, NoiseSource::kInitIdio));
  NoiseStream step_common(NoiseSeed(seed, NoiseSource::kStepCommon));
  NoiseStream step_idio(NoiseSeed(seed, NoiseSource::kStepIdio));

  typename C::State e0 = C::State::Zero(d);
  typename C::State e1 = C::State::Zero(d);
  init_common.Draw(noise.init_common, e0);
  init_idio.Draw(noise.init_idio, e1);

  typename C::State x = e0 + e1;
  typename C::State xbar = e0 + noise.init_idio.Mean(d);
  typename C::State next = C::State::Zero(d);
  typename C::Ctrl u1 = C::Ctrl::Zero(l), u2 = C::Ctrl::Zero(l);
  typename C::Ctrl ubar1 = C::Ctrl::Zero(l), ubar2 = C::Ctrl::Zero(l);

  double utility = 0.0;
  double discount = 1.0;
  for (int t = 0; t < horizon; ++t) {
    ubar1.noalias() = -c.L1 * xbar;
    ubar2.noalias() = c.L2 * xbar;
    u1.noalias() = -c.K1 * (x - xbar);
    u1 += ubar1;
    u2.noalias() = c.K2 * (x - xbar);
    u2 += ubar2;
    const double cost = internal::StageCost(c.Q, c.Qtil, c.R1, c.Rtil1, c.R2,
                                            c.Rtil2, x, xbar, u1, ubar1, u2,
                                            ubar2);
    utility += discount * cost;
    discount *= gamma;
    record(x, xbar, u1, u2, cost);
    if (t + 1 == horizon) break;

    step_common.Draw(noise.step_common, e0);
    step_idio.Draw(noise.step_idio, e1);
    next.noalias() = c.A * x;
    next.noalias() += c.Abar * xbar;
    next.noalias() += c.B1 * u1;
    next.noalias() += c.B1bar * ubar1;
    next.noalias() += c.B2 * u2;
    next.noalias() += c.B2bar * ubar2;
    next += e0 + e1;
    x = next;
    next.noalias() = c.Atil * xbar;
    next.noalias() += c.Btil1 * ubar1;
    next.noalias() += c.Btil2 * ubar2;
    next += e0;
    xbar = next;
  }
  return utility;
}

template <typename Recorder>
double DispatchMkv(const Model& model, const PolicyPair& theta, int horizon,
                   std::uint64_t seed, Recorder&& record) {
  CheckRollout(model, theta, horizon);
  if (model.state_dim() == 1 && model.control_dim() == 1) {
    return RunMkv<1, 1>(model, theta, horizon, seed, record);
  }
  return RunMkv<Eigen::Dynamic, Eigen::Dynamic>(model, theta, horizon, seed,
                                                record);
}

template <int D, int L, typename Recorder>
double RunNAgent(const Model& model, const PolicyPair& theta, int num_agents,
                 int horizon, std::uint64_t seed, Recorder&& record) {
  using C = Coefficients<D, L>;
  using States = Eigen::Matrix<double, D, Eigen::Dynamic>;
  using Ctrls = Eigen::Matrix<double, L, Eigen::Dynamic>;
  const C c(model, theta);
  const NoiseSpec& noise = model.params().noise;
  const int d = model.state_dim();
  const int l = model.control_dim();
  const int n = num_agents;
  const double gamma = model.gamma();
  const double inv_n = 1.0 / n;

  NoiseStream init_common(NoiseSeed(seed, NoiseSource::kInitCommon));
  NoiseStream init_idio(NoiseSeed(seed, NoiseSource::kInitIdio));
  NoiseStream step_common(NoiseSeed(seed, NoiseSource::kStepCommon));
  NoiseStream step_idio(NoiseSeed(seed, NoiseSource::kStepIdio));

  typename C::State e0 = C::State::Zero(d);
  typename C::State e1 = C::State::Zero(d);
  States x = States::Zero(d, n);
  init_common.Draw(noise.init_common, e0);
  for (int i = 0; i < n; ++i) {
    init_idio.Draw(noise.init_idio, e1);
    x.col(i) = e0 + e1;
  }

  States next = States::Zero(d, n);
  Ctrls u1 = Ctrls::Zero(l, n), u2 = Ctrls::Zero(l, n);
  typename C::State xbar = C::State::Zero(d);
  typename C::State shared = C::State::Zero(d);
  typename C::State xi = C::State::Zero(d);
  typename C::Ctrl ubar1 = C::Ctrl::Zero(l), ubar2 = C::Ctrl::Zero(l);
  typename C::Ctrl u1i = C::Ctrl::Zero(l), u2i = C::Ctrl::Zero(l);

  double utility = 0.0;
  double discount = 1.0;
  for (int t = 0; t < horizon; ++t) {
    xbar = x.rowwise().sum() * inv_n;
    for (int i = 0; i < n; ++i) {
      xi = x.col(i);
      u1.col(i).noalias() = -c.K1 * (xi - xbar) - c.L1 * xbar;
      u2.col(i).noalias() = c.K2 * (xi - xbar) + c.L2 * xbar;
    }
    ubar1 = u1.rowwise().sum() * inv_n;
    ubar2 = u2.rowwise().sum() * inv_n;

    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
      xi = x.col(i);
      u1i = u1.col(i);
      u2i = u2.col(i);
      cost += internal::StageCost(c.Q, c.Qtil, c.R1, c.Rtil1, c.R2, c.Rtil2,
                                  xi, xbar, u1i, ubar1, u2i, ubar2);
    }
    cost *= inv_n;
    utility += discount * cost;
    discount *= gamma;
    record(x, xbar, ubar1, ubar2, cost);
    if (t + 1 == horizon) break;

    step_common.Draw(noise.step_common, e0);
    shared.noalias() = c.Abar * xbar;
    shared.noalias() += c.B1bar * ubar1;
    shared.noalias() += c.B2bar * ubar2;
    shared += e0;
    next.noalias() = c.A * x;
    next.noalias() += c.B1 * u1;
    next.noalias() += c.B2 * u2;
    next.colwise() += shared;
    for (int i = 0; i < n; ++i) {
      step_idio.Draw(noise.step_idio, e1);
      next.col(i) += e1;
    }
    x.swap(next);
  }
  return utility;
}

template <typename Recorder>
double DispatchNAgent(const Model& model, const PolicyPair& theta,
                      int num_agents, int horizon, std::uint64_t seed,
                      Recorder&& record) {
  CheckRollout(model, theta, horizon);
  if (num_agents < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one agent");
  }
  if (model.state_dim() == 1 && model.control_dim() == 1) {
    return RunNAgent<1, 1>(model, theta, num_agents, horizon, seed, record);
  }
  return RunNAgent<Eigen::Dynamic, Eigen::Dynamic>(model, theta, num_agents,
                                                   horizon, seed, record);
}

}  // namespace

MkvTrajectory SimulateMkv(const Model& model, const PolicyPair& theta,
                          int horizon, std::uint64_t seed) {
  MkvTrajectory out;
  out.xs.reserve(horizon);
  out.xbars.reserve(horizon);
  out.u1s.reserve(horizon);
  out.u2s.reserve(horizon);
  out.costs.reserve(horizon);
  out.utility = DispatchMkv(
      model, theta, horizon, seed,
      [&](const auto& x, const auto& xbar, const auto& u1, const auto& u2,
          double cost) {
        out.xs.emplace_back(x);
        out.xbars.emplace_back(xbar);
        out.u1s.emplace_back(u1);
        out.u2s.emplace_back(u2);
        out.costs.push_back(cost);
      });
  return out;
}

double SampleMkvUtility(const Model& model, const PolicyPair& theta,
                        int horizon, std::uint64_t seed) {
  return DispatchMkv(model, theta, horizon, seed, NoRecord{});
}

NAgentTrajectory SimulateNAgent(const Model& model, const PolicyPair& theta,
                                int num_agents, int horizon,
                                std::uint64_t seed) {
  NAgentTrajectory out;
  out.num_agents = num_agents;
  out.utility = DispatchNAgent(
      model, theta, num_agents, horizon, seed,
      [&](const auto& x, const auto& xbar, const auto& ubar1,
          const auto& ubar2, double cost) {
        out.states.emplace_back(x);
        out.xbars.emplace_back(xbar);
        out.ubar1s.emplace_back(ubar1);
        out.ubar2s.emplace_back(ubar2);
        out.costs.push_back(cost);
      });
  return out;
}

double SampleNAgentUtility(const Model& model, const PolicyPair& theta,
                           int num_agents, int horizon, std::uint64_t seed) {
  return DispatchNAgent(model, theta, num_agents, horizon, seed, NoRecord{});
}

namespace {

void WriteColumns(std::ostream& out, const char* name, Eigen::Index size) {
  if (size == 1) {
    out << ',' << name;
    return;
  }
  for (Eigen::Index i = 0; i < size; ++i) out << ',' << name << '_' << i;
}

void WriteValues(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << FormatDouble(v[i]);
}

}  // namespace

void WriteTrajectoryCsv(const MkvTrajectory& trajectory, std::ostream& out) {
  if (trajectory.xs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  }
  out << 't';
  WriteColumns(out, "x", trajectory.xs.front().size());
  WriteColumns(out, "xbar", trajectory.xbars.front().size());
  WriteColumns(out, "u1", trajectory.u1s.front().size());
  WriteColumns(out, "u2", trajectory.u2s.front().size());
  out << ",c\n";
  for (std::size_t t = 0; t < trajectory.xs.size(); ++t) {
    out << t;
    WriteValues(out, trajectory.xs[t]);
    WriteValues(out, trajectory.xbars[t]);
    WriteValues(out, trajectory.u1s[t]);
    WriteValues(out, trajectory.u2s[t]);
    out << ',' << FormatDouble(trajectory.costs[t]) << '\n';
  }
}

void WriteTrajectoryCsv(const NAgentTrajectory& trajectory, std::ostream& out) {
  if (trajectory.xbars.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  }
  out << 't';
  WriteColumns(out, "xbar", trajectory.xbars.front().size());
  WriteColumns(out, "ubar1", trajectory.ubar1s.front().size());
  WriteColumns(out, "ubar2", trajectory.ubar2s.front().size());
  out << ",c\n";
  for (std::size_t t = 0; t < trajectory.xbars.size(); ++t) {
    out << t;
    WriteValues(out, trajectory.xbars[t]);
    WriteValues(out, trajectory.ubar1s[t]);
    WriteValues(out, trajectory.ubar2s[t]);
    out << ',' << FormatDouble(trajectory.costs[t]) << '\n';
  }
}

}  // namespace lqmftg
