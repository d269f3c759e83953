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

#include "lqmftg/config.h"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "lqmftg/error.h"
#include "lqmftg/format.h"

namespace lqmftg {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;
using Document = std::map<std::string, Section>;

const std::map<std::string, std::set<std::string>>& Schema() {
  static const auto* schema = new std::map<std::string, std::set<std::string>>{
      {"experiment",
       {"method", "oracle", "repeats", "master_seed", "output_dir", "threads",
        "perturb_initial_radius"}},
      {"model",
       {"state_dim", "control_dim", "A", "Abar", "B1", "B1bar", "B2", "B2bar",
        "Q", "Qbar", "R1", "R1bar", "R2", "R2bar", "gamma"}},
      {"noise", {"init_common", "init_idio", "step_common", "step_idio"}},
      {"optimizer",
       {"T1", "T2", "T", "eta1", "eta2", "theta0_K1", "theta0_L1", "theta0_K2",
        "theta0_L2", "log_every", "shrink_on_exit"}},
      {"estimator",
       {"perturbations", "horizon", "radius", "smoothing", "threads"}},
      {"validation", {"Ns", "samples", "horizon", "policy"}},
      {"simulation", {"horizon", "agents", "policy"}},
  };
  return *schema;
}

Document Tokenize(std::string_view text) {
  Document doc;
  Section* current = nullptr;
  std::string current_name;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::kParseError, where + ": unterminated section");
      }
      current_name = std::string(Trim(line.substr(1, line.size() - 2)));
      if (!Schema().contains(current_name)) {
        throw Error(ErrorCode::kSchemaError,
                    where + ": unknown section [" + current_name + "]");
      }
      if (doc.contains(current_name)) {
        throw Error(ErrorCode::kParseError,
                    where + ": duplicate section [" + current_name + "]");
      }
      current = &doc[current_name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParseError, where + ": expected key = value");
    }
    if (current == nullptr) {
      throw Error(ErrorCode::kParseError, where + ": key outside a section");
    }
    const std::string key(Trim(line.substr(0, eq)));
    const std::string value(Trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw Error(ErrorCode::kParseError, where + ": empty key or value");
    }
    if (!Schema().at(current_name).contains(key)) {
      throw Error(ErrorCode::kSchemaError,
                  where + ": unknown field " + current_name + "." + key);
    }
    if (!current->emplace(key, Entry{value, line_no}).second) {
      throw Error(ErrorCode::kParseError,
                  where + ": duplicate field " + current_name + "." + key);
    }
  }
  return doc;
}

template <typename T>
bool ParseNumber(std::string_view text, T& out) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto result = std::from_chars(text.data(), text.data() + text.size(), out);
  return result.ec == std::errc() && result.ptr == text.data() + text.size();
}

// Typed access to one section, remembering its name for error messages.
class Reader {
 public:
  Reader(const Document& doc, const std::string& name)
      : name_(name), section_(Lookup(doc, name)) {}

  bool Has(const std::string& key) const {
    return section_ != nullptr && section_->contains(key);
  }

  const std::string& Raw(const std::string& key) const {
    if (!Has(key)) {
      throw Error(ErrorCode::kSchemaError,
                  "missing field " + name_ + "." + key);
    }
    return section_->at(key).value;
  }

  template <typename T>
  T Number(const std::string& key) const {
    T out{};
    if (!ParseNumber(Raw(key), out)) Fail(key, "expected a number");
    return out;
  }

  template <typename T>
  void Number(const std::string& key, T& out) const {
    if (Has(key)) out = Number<T>(key);
  }

  bool Bool(const std::string& key) const {
    const std::string& v = Raw(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    Fail(key, "expected true or false");
  }

  Matrix Mat(const std::string& key, int rows, int cols) const {
    const std::string& raw = Raw(key);
    Matrix m;
    try {
      m = ParseMatrix(raw);
    } catch (const Error& e) {
      Fail(key, e.what());
    }
    if (m.rows() != rows || m.cols() != cols) {
      throw Error(ErrorCode::kSchemaError,
                  Where(key) + ": expected a " + std::to_string(rows) + " x " +
                      std::to_string(cols) + " matrix");
    }
    return m;
  }

  Distribution Dist(const std::string& key) const {
    const std::string& raw = Raw(key);
    try {
      return ParseDistribution(raw);
    } catch (const Error& e) {
      Fail(key, e.what());
    }
  }

  PolicyChoice Policy(const std::string& key) const {
    const std::string& v = Raw(key);
    if (v == "nash") return PolicyChoice::kNash;
    if (v == "theta0") return PolicyChoice::kTheta0;
    Fail(key, "expected nash or theta0");
  }

  [[noreturn]] void Fail(const std::string& key, const std::string& what) const {
    throw Error(ErrorCode::kParseError, Where(key) + ": " + what);
  }

 private:
  static const Section* Lookup(const Document& doc, const std::string& name) {
    const auto it = doc.find(name);
    return it == doc.end() ? nullptr : &it->second;
  }

  std::string Where(const std::string& key) const {
    std::string where = name_ + "." + key;
    if (Has(key)) where += " (line " + std::to_string(section_->at(key).line) + ")";
    return where;
  }

  std::string name_;
  const Section* section_;
};

void ReadModel(const Document& doc, ModelParams& p) {
  const Reader r(doc, "model");
  p.state_dim = 1;
  p.control_dim = 1;
  r.Number("state_dim", p.state_dim);
  r.Number("control_dim", p.control_dim);
  if (p.state_dim < 1 || p.control_dim < 1) {
    throw Error(ErrorCode::kSchemaError, "model dimensions must be >= 1");
  }
  const int d = p.state_dim;
  const int l = p.control_dim;
  p.A = r.Mat("A", d, d);
  p.Abar = r.Mat("Abar", d, d);
  p.B1 = r.Mat("B1", d, l);
  p.B1bar = r.Mat("B1bar", d, l);
  p.B2 = r.Mat("B2", d, l);
  p.B2bar = r.Mat("B2bar", d, l);
  p.Q = r.Mat("Q", d, d);
  p.Qbar = r.Mat("Qbar", d, d);
  p.R1 = r.Mat("R1", l, l);
  p.R1bar = r.Mat("R1bar", l, l);
  p.R2 = r.Mat("R2", l, l);
  p.R2bar = r.Mat("R2bar", l, l);
  p.gamma = r.Number<double>("gamma");

  const Reader n(doc, "noise");
  p.noise = ReferenceParams().noise;
  if (n.Has("init_common")) p.noise.init_common = n.Dist("init_common");
  if (n.Has("init_idio")) p.noise.init_idio = n.Dist("init_idio");
  if (n.Has("step_common")) p.noise.step_common = n.Dist("step_common");
  if (n.Has("step_idio")) p.noise.step_idio = n.Dist("step_idio");

  try {
    Validate(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("model: ") + e.what());
  }
}

void ReadOptimizer(const Document& doc, ExperimentConfig& cfg) {
  OptimizerConfig& o = cfg.optimizer;
  const Reader e(doc, "experiment");
  const std::string& method = e.Raw("method");
  if (method == "AG" || method == "ag") {
    o.method = Method::kAg;
  } else if (method == "GDA" || method == "gda") {
    o.method = Method::kGda;
  } else {
    e.Fail("method", "expected AG or GDA");
  }
  const std::string& oracle = e.Raw("oracle");
  if (oracle == "exact") {
    o.oracle = OracleKind::kExact;
  } else if (oracle == "sampled") {
    o.oracle = OracleKind::kSampled;
  } else {
    e.Fail("oracle", "expected exact or sampled");
  }
  e.Number("repeats", cfg.repeats);
  e.Number("master_seed", cfg.master_seed);
  e.Number("threads", cfg.threads);
  e.Number("perturb_initial_radius", cfg.perturb_initial_radius);
  if (e.Has("output_dir")) cfg.output_dir = e.Raw("output_dir");

  const Reader r(doc, "optimizer");
  r.Number("T1", o.T1);
  r.Number("T2", o.T2);
  r.Number("T", o.T);
  r.Number("eta1", o.eta1);
  r.Number("eta2", o.eta2);
  r.Number("log_every", o.log_every);
  if (r.Has("shrink_on_exit")) o.shrink_on_exit = r.Bool("shrink_on_exit");
  const int d = cfg.model.state_dim;
  const int l = cfg.model.control_dim;
  o.theta0 = PolicyPair::Zero(d, l);
  if (r.Has("theta0_K1")) o.theta0.K1 = r.Mat("theta0_K1", l, d);
  if (r.Has("theta0_L1")) o.theta0.L1 = r.Mat("theta0_L1", l, d);
  if (r.Has("theta0_K2")) o.theta0.K2 = r.Mat("theta0_K2", l, d);
  if (r.Has("theta0_L2")) o.theta0.L2 = r.Mat("theta0_L2", l, d);

  cfg.has_estimator = doc.contains("estimator");
  const Reader s(doc, "estimator");
  EstimatorConfig& est = o.estimator;
  s.Number("perturbations", est.perturbations);
  s.Number("horizon", est.horizon);
  s.Number("radius", est.radius);
  s.Number("threads", est.threads);
  if (s.Has("smoothing")) {
    const std::string& v = s.Raw("smoothing");
    if (v == "parameter_count") {
      est.smoothing = SmoothingConstant::kParameterCount;
    } else if (v == "state_dim") {
      est.smoothing = SmoothingConstant::kStateDim;
    } else {
      s.Fail("smoothing", "expected parameter_count or state_dim");
    }
  }
}

std::vector<int> ParseIntList(const Reader& r, const std::string& key) {
  std::vector<int> out;
  std::string_view rest = r.Raw(key);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    int v = 0;
    if (!ParseNumber(rest.substr(0, comma), v)) r.Fail(key, "expected integers");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

void ReadValidation(const Document& doc, ExperimentConfig& cfg) {
  const Reader v(doc, "validation");
  if (v.Has("Ns")) cfg.validation.Ns = ParseIntList(v, "Ns");
  v.Number("samples", cfg.validation.samples);
  v.Number("horizon", cfg.validation.horizon);
  if (v.Has("policy")) cfg.validation.policy = v.Policy("policy");

  const Reader s(doc, "simulation");
  s.Number("horizon", cfg.simulation.horizon);
  s.Number("agents", cfg.simulation.agents);
  if (s.Has("policy")) cfg.simulation.policy = s.Policy("policy");
}

void CheckCrossFields(const ExperimentConfig& cfg) {
  if (cfg.optimizer.oracle == OracleKind::kSampled && !cfg.has_estimator) {
    throw Error(ErrorCode::kCrossFieldError,
                "oracle = sampled requires an [estimator] section");
  }
  if (cfg.repeats < 1 || cfg.threads < 1) {
    throw Error(ErrorCode::kSchemaError, "repeats and threads must be >= 1");
  }
  if (!(cfg.perturb_initial_radius >= 0.0)) {
    throw Error(ErrorCode::kSchemaError,
                "perturb_initial_radius must be non-negative");
  }
  const ValidationConfig& v = cfg.validation;
  if (v.Ns.empty() || v.samples < 2 || v.horizon < 1) {
    throw Error(ErrorCode::kSchemaError,
                "validation needs Ns, samples >= 2 and horizon >= 1");
  }
  for (int n : v.Ns) {
    if (n < 1) throw Error(ErrorCode::kSchemaError, "validation Ns must be >= 1");
  }
  if (cfg.simulation.horizon < 1 || cfg.simulation.agents < 0) {
    throw Error(ErrorCode::kSchemaError,
                "simulation needs horizon >= 1 and agents >= 0");
  }
  try {
    ValidateOptimizerConfig(cfg.optimizer);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, e.what());
  }
}

}  // namespace

Matrix ParseMatrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::string_view rest = text;
  while (true) {
    const auto semi = rest.find(';');
    std::string_view row = Trim(rest.substr(0, semi));
    std::vector<double> values;
    std::size_t i = 0;
    while (i < row.size()) {
      while (i < row.size() && (row[i] == ' ' || row[i] == '\t' || row[i] == ',')) {
        ++i;
      }
      if (i == row.size()) break;
      std::size_t j = i;
      while (j < row.size() && row[j] != ' ' && row[j] != '\t' && row[j] != ',') {
        ++j;
      }
      double v = 0.0;
      if (!ParseNumber(row.substr(i, j - i), v)) {
        throw Error(ErrorCode::kParseError,
                    "bad number '" + std::string(row.substr(i, j - i)) + "'");
      }
      values.push_back(v);
      i = j;
    }
    if (values.empty()) throw Error(ErrorCode::kParseError, "empty matrix row");
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorCode::kParseError, "ragged matrix rows");
    }
    rows.push_back(std::move(values));
    if (semi == std::string_view::npos) break;
    rest = rest.substr(semi + 1);
  }
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::string FormatMatrix(const Matrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) out += "; ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ' ';
      out += FormatDouble(m(r, c));
    }
  }
  return out;
}

Distribution ParseDistribution(std::string_view text) {
  text = Trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw Error(ErrorCode::kParseError,
                "expected uniform(a, b), gaussian(m, v) or point(v)");
  }
  const std::string_view name = Trim(text.substr(0, open));
  const Matrix args = ParseMatrix(text.substr(open + 1, text.size() - open - 2));
  if (args.rows() != 1) throw Error(ErrorCode::kParseError, "bad arguments");
  const auto n = args.cols();
  if (name == "uniform" && n == 2) {
    if (!(args(0, 0) < args(0, 1))) {
      throw Error(ErrorCode::kParseError, "uniform needs lo < hi");
    }
    return Distribution::Uniform(args(0, 0), args(0, 1));
  }
  if (name == "gaussian" && n == 2) {
    if (!(args(0, 1) >= 0.0)) {
      throw Error(ErrorCode::kParseError, "gaussian variance must be >= 0");
    }
    return Distribution::Gaussian(args(0, 0), args(0, 1));
  }
  if (name == "point" && n == 1) return Distribution::PointMass(args(0, 0));
  throw Error(ErrorCode::kParseError,
              "unknown distribution '" + std::string(text) + "'");
}

ExperimentConfig ParseConfig(std::string_view text,
                             const ConfigOverrides& overrides) {
  const Document doc = Tokenize(text);
  ExperimentConfig cfg;
  ReadModel(doc, cfg.model);
  ReadOptimizer(doc, cfg);
  ReadValidation(doc, cfg);
  if (overrides.seed) cfg.master_seed = *overrides.seed;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  if (overrides.repeats) cfg.repeats = *overrides.repeats;
  if (overrides.oracle) cfg.optimizer.oracle = *overrides.oracle;
  CheckCrossFields(cfg);
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path,
                            const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str(), overrides);
}

}  // namespace lqmftg
