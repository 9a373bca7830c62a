// Copyright 2026 The FBT Authors
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
#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fbt/config.hpp"
#include "fbt/error.hpp"
#include "fbt/records.hpp"
#include "json.hpp"

namespace fbt {

using nlohmann::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

Matrix matrix_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a matrix");
  const size_t rows = j.size(), cols = j[0].size();
  Matrix m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(where + ": ragged matrix");
    for (size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ConfigError(where + ": non-numeric entry");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

CMatrix complex_matrix_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a complex matrix");
  const size_t rows = j.size(), cols = j[0].size();
  CMatrix m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(where + ": ragged matrix");
    for (size_t k = 0; k < cols; ++k) {
      const json& e = j[i][k];
      if (e.is_number()) {
        m(i, k) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ConfigError(where + ": entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

NoiseSpec noise_from(const json& j, const std::string& where) {
  require_object(j, where);
  const std::string kind = get<std::string>(j, "kind", where);
  NoiseSpec s;
  if (kind == "identity") {
    s.kind = NoiseKind::kIdentity;
  } else if (kind == "depolarizing") {
    s.kind = NoiseKind::kDepolarizing;
    s.p = get<double>(j, "p", where);
  } else if (kind == "coherent_overrotation" || kind == "coherent") {
    s.kind = NoiseKind::kCoherentOverrotation;
    s.axis = get<std::string>(j, "axis", where);
    s.theta = get<double>(j, "theta", where);
  } else if (kind == "amplitude_damping") {
    s.kind = NoiseKind::kAmplitudeDamping;
    s.gamma = get<double>(j, "gamma", where);
    // 1-based in files, like the gate names
    s.qubit = get_or<int>(j, "qubit", 0, where) - 1;
  } else if (kind == "assignment") {
    s.kind = NoiseKind::kAssignment;
    if (!j.contains("matrix")) throw ConfigError(where + ": missing 'matrix'");
    s.confusion = matrix_from(j.at("matrix"), where + ".matrix");
  } else if (kind == "composite") {
    s.kind = NoiseKind::kComposite;
    if (!j.contains("components") || !j.at("components").is_array()) {
      throw ConfigError(where + ": composite needs a 'components' array");
    }
    int i = 0;
    for (const json& c : j.at("components")) {
      s.components.push_back(noise_from(c, where + ".components[" + std::to_string(i++) + "]"));
    }
  } else {
    throw ConfigError(where + ": unknown noise kind '" + kind + "'");
  }
  return s;
}

GateSet gateset_from(const json& j, const std::string& where) {
  if (j.is_string()) return builtin_gate_set(j.get<std::string>());
  require_object(j, where);
  GateSet gs;
  if (j.contains("builtin")) {
    gs = builtin_gate_set(get<std::string>(j, "builtin", where));
  } else {
    const int n = get<int>(j, "n_qubits", where);
    if (n < 1 || n > 3) throw ConfigError(where + ".n_qubits must be in [1, 3]");
    gs.n_qubits = n;
    if (!j.contains("gates") || !j.at("gates").is_array() || j.at("gates").empty()) {
      throw ConfigError(where + ": needs a non-empty 'gates' array");
    }
    int i = 0;
    for (const json& g : j.at("gates")) {
      const std::string w = where + ".gates[" + std::to_string(i++) + "]";
      require_object(g, w);
      NoisyGate gate;
      gate.name = get<std::string>(g, "name", w);
      if (!g.contains("unitary")) throw ConfigError(w + ": missing 'unitary'");
      gate.unitary = complex_matrix_from(g.at("unitary"), w + ".unitary");
      try {
        gate.ideal = unitary_to_ptm(gate.unitary);
      } catch (const ValidationError& e) {
        throw ConfigError(w + ": " + e.what());
      }
      if (gate.ideal.n_qubits() != n) throw ConfigError(w + ": unitary has the wrong size");
      gate.noise = PauliTransferMatrix::identity(n);
      gate.is_virtual = get_or<bool>(g, "virtual", false, w);
      gs.gates.push_back(std::move(gate));
    }
    gs.meas_noise = PauliTransferMatrix::identity(n);
    gs.prep_noise = PauliTransferMatrix::identity(n);
    gs.povm = Povm::computational(n);
    gs.rho0 = DensityState::basis(n, get_or<int>(j, "rho0_index", 0, where));
    gs.estimate_meas_noise = false;
  }
  gs.estimate_meas_noise = get_or<bool>(j, "estimate_meas_noise", gs.estimate_meas_noise, where);
  gs.estimate_prep_noise = get_or<bool>(j, "estimate_prep_noise", gs.estimate_prep_noise, where);
  return gs;
}

TruthSpec truth_from(const json& j, const std::string& where) {
  require_object(j, where);
  TruthSpec t;
  if (j.contains("default")) t.default_gate = noise_from(j.at("default"), where + ".default");
  if (j.contains("gates")) {
    require_object(j.at("gates"), where + ".gates");
    for (const auto& [name, spec] : j.at("gates").items()) {
      t.gates[name] = noise_from(spec, where + ".gates." + name);
    }
  }
  if (j.contains("meas")) t.meas = noise_from(j.at("meas"), where + ".meas");
  if (j.contains("prep")) t.prep = noise_from(j.at("prep"), where + ".prep");
  return t;
}

PriorSpec prior_from(const json& j, const std::string& where) {
  PriorSpec p;
  if (j.is_null()) return p;
  require_object(j, where);
  p.pulsed_sigma = get_or<double>(j, "pulsed_sigma", p.pulsed_sigma, where);
  p.virtual_sigma = get_or<double>(j, "virtual_sigma", p.virtual_sigma, where);
  p.spam_sigma = get_or<double>(j, "spam_sigma", p.spam_sigma, where);
  if (p.pulsed_sigma < 0 || p.virtual_sigma < 0 || p.spam_sigma < 0) {
    throw ConfigError(where + ": sigmas must be non-negative");
  }
  return p;
}

EngineOptions engine_from(const json& j, const std::string& where) {
  EngineOptions e;
  if (j.is_null()) return e;
  require_object(j, where);
  e.sampling.n_samples = get_or<int>(j, "n_samples", e.sampling.n_samples, where);
  e.sampling.antithetic = get_or<bool>(j, "antithetic", e.sampling.antithetic, where);
  e.dominance_ratio = get_or<double>(j, "dominance_ratio", e.dominance_ratio, where);
  e.dominance_window = get_or<int>(j, "dominance_window", e.dominance_window, where);
  e.enable_fast_path = get_or<bool>(j, "fast_path", e.enable_fast_path, where);
  e.use_cross_covariance =
      get_or<bool>(j, "use_cross_covariance", e.use_cross_covariance, where);
  e.eps_jitter = get_or<double>(j, "eps_jitter", e.eps_jitter, where);
  if (e.sampling.n_samples < 2) throw ConfigError(where + ".n_samples must be >= 2");
  if (!(e.dominance_ratio > 0)) throw ConfigError(where + ".dominance_ratio must be > 0");
  if (e.dominance_window < 1) throw ConfigError(where + ".dominance_window must be >= 1");
  return e;
}

FitConfig fit_from(const json& j, const std::string& where, bool need_dataset) {
  require_object(j, where);
  FitConfig c;
  if (!j.contains("gateset")) throw ConfigError(where + ": missing 'gateset'");
  c.gateset = gateset_from(j.at("gateset"), where + ".gateset");
  if (need_dataset) c.dataset = get<std::string>(j, "dataset", where);
  c.prior = prior_from(j.value("prior", json()), where + ".prior");
  c.engine = engine_from(j.value("engine", json()), where + ".engine");
  c.seed = get_or<uint64_t>(j, "seed", 1, where);
  c.engine.seed = c.seed;
  if (j.contains("rb_prior")) {
    const json& r = j.at("rb_prior");
    const std::string w = where + ".rb_prior";
    require_object(r, w);
    RbPriorConfig rb;
    rb.fidelity = get<double>(r, "fidelity", w);
    rb.sigma = get<double>(r, "sigma", w);
    rb.n_samples = get_or<int>(r, "n_samples", rb.n_samples, w);
    rb.floor_sigma = get_or<double>(r, "floor_sigma", rb.floor_sigma, w);
    c.rb_prior = rb;
  }
  c.metrics_samples = get_or<int>(j, "metrics_samples", c.metrics_samples, where);
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir, where);
  c.emit_diagnostics = get_or<bool>(j, "emit_diagnostics", false, where);
  const std::string conv = get_or<std::string>(j, "fidelity_convention", "average", where);
  if (conv == "average") c.convention = FidelityConvention::kAverage;
  else if (conv == "normalized_trace") c.convention = FidelityConvention::kNormalizedTrace;
  else throw ConfigError(where + ".fidelity_convention must be average or normalized_trace");
  return c;
}

std::string hash_of(const json& j) { return fnv1a_hex(j.dump()); }

}  // namespace

std::string ptm_to_json(const PauliTransferMatrix& ptm) {
  json j;
  j["n_qubits"] = ptm.n_qubits();
  std::vector<double> e;
  e.reserve(ptm.size() * ptm.size());
  for (int i = 0; i < ptm.size(); ++i)
    for (int k = 0; k < ptm.size(); ++k) e.push_back(ptm(i, k));
  j["entries"] = e;
  return j.dump();
}

PauliTransferMatrix ptm_from_json(const std::string& text) {
  const json j = parse(text);
  require_object(j, "ptm");
  const int n = get<int>(j, "n_qubits", "ptm");
  if (n < 1 || n > 4) throw ConfigError("ptm.n_qubits must be in [1, 4]");
  const int n2 = 1 << (2 * n);
  Matrix m(n2, n2);
  const json& e = j.contains("entries") ? j.at("entries") : json();
  if (e.is_array() && e.size() == static_cast<size_t>(n2) * n2 && e[0].is_number()) {
    for (int i = 0; i < n2; ++i)
      for (int k = 0; k < n2; ++k) m(i, k) = e[i * n2 + k].get<double>();
  } else if (e.is_array() && e.size() == static_cast<size_t>(n2)) {
    m = matrix_from(e, "ptm.entries");
    if (m.cols() != n2) throw ConfigError("ptm.entries has the wrong shape");
  } else {
    throw ConfigError("ptm.entries must hold " + std::to_string(n2 * n2) + " values");
  }
  return PauliTransferMatrix(n, std::move(m));
}

GateSet gateset_from_json(const std::string& text) {
  return gateset_from(parse(text), "gateset");
}

NoiseSpec noise_spec_from_json(const std::string& text) {
  return noise_from(parse(text), "noise");
}

TruthSpec truth_spec_from_json(const std::string& text) {
  return truth_from(parse(text), "truth");
}

GateSet apply_truth(const GateSet& ideal, const TruthSpec& truth) {
  GateSet gs = ideal;
  const int n = gs.n_qubits;
  for (const auto& [name, spec] : truth.gates) {
    const auto names = gs.gate_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("truth names unknown gate '" + name + "'");
    }
  }
  try {
    for (NoisyGate& g : gs.gates) {
      auto it = truth.gates.find(g.name);
      g.noise = make_noise_model(it != truth.gates.end() ? it->second : truth.default_gate, n);
    }
    gs.meas_noise = make_noise_model(truth.meas, n);
    gs.prep_noise = make_noise_model(truth.prep, n);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("truth: ") + e.what());
  }
  return gs;
}

SimulateConfig simulate_config_from_json(const std::string& text) {
  const json j = parse(text);
  require_object(j, "config");
  SimulateConfig c;
  if (!j.contains("gateset")) throw ConfigError("config: missing 'gateset'");
  c.gateset = gateset_from(j.at("gateset"), "config.gateset");
  if (j.contains("truth")) c.truth = truth_from(j.at("truth"), "config.truth");
  c.n_settings = get_or<int>(j, "n_settings", c.n_settings, "config");
  c.max_length = get_or<int>(j, "max_length", c.max_length, "config");
  c.shots = get_or<int64_t>(j, "shots", c.shots, "config");
  c.seed = get_or<uint64_t>(j, "seed", c.seed, "config");
  c.output = get_or<std::string>(j, "output", c.output, "config");
  c.truth_output = get_or<std::string>(j, "truth_output", c.output + ".truth.json", "config");
  if (c.n_settings < 0) throw ConfigError("config.n_settings must be >= 0");
  if (c.max_length < 0) throw ConfigError("config.max_length must be >= 0");
  if (c.shots < 1) throw ConfigError("config.shots must be >= 1");
  c.config_hash = hash_of(j);
  return c;
}

FitConfig fit_config_from_json(const std::string& text) {
  const json j = parse(text);
  FitConfig c = fit_from(j, "config", true);
  c.config_hash = hash_of(j);
  return c;
}

RbConfig rb_config_from_json(const std::string& text) {
  const json j = parse(text);
  require_object(j, "config");
  RbConfig c;
  c.fit = fit_from(j, "config", false);
  c.gateset = c.fit.gateset;
  if (c.gateset.n_qubits != 2) throw ConfigError("config.gateset: RB needs the two-qubit set");
  if (j.contains("truth")) c.truth = truth_from(j.at("truth"), "config.truth");
  c.lengths = get<std::vector<int>>(j, "lengths", "config");
  if (c.lengths.size() < 3) throw ConfigError("config.lengths needs at least 3 entries");
  for (int l : c.lengths) {
    if (l < 1) throw ConfigError("config.lengths entries must be >= 1");
  }
  c.sequences_per_length = get_or<int>(j, "sequences_per_length", c.sequences_per_length, "config");
  c.shots = get_or<int64_t>(j, "shots", c.shots, "config");
  c.seed = c.fit.seed;
  c.output = get_or<std::string>(j, "output", c.output, "config");
  c.repurpose = get_or<bool>(j, "repurpose", false, "config");
  if (c.shots < 1) throw ConfigError("config.shots must be >= 1");
  c.config_hash = hash_of(j);
  c.fit.config_hash = c.config_hash;
  return c;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {
constexpr char kBeliefMagic[8] = {'F', 'B', 'T', 'B', 'E', 'L', '0', '1'};
}

void save_belief(const std::string& path, const GaussianBelief& belief) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  const uint64_t p = belief.dim(), r = belief.rank();
  out.write(kBeliefMagic, sizeof kBeliefMagic);
  out.write(reinterpret_cast<const char*>(&p), sizeof p);
  out.write(reinterpret_cast<const char*>(&r), sizeof r);
  out.write(reinterpret_cast<const char*>(belief.mean().data()), sizeof(double) * p);
  out.write(reinterpret_cast<const char*>(belief.factor().data()), sizeof(double) * p * r);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

GaussianBelief load_belief(const std::string& path, const ParameterPacking& packing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open belief '" + path + "'");
  char magic[8];
  uint64_t p = 0, r = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&p), sizeof p);
  in.read(reinterpret_cast<char*>(&r), sizeof r);
  if (!in || std::memcmp(magic, kBeliefMagic, sizeof magic) != 0) {
    throw DataError("'" + path + "' is not a belief file");
  }
  if (p != static_cast<uint64_t>(packing.total()) || r == 0 || r > 4 * p) {
    throw DataError("belief in '" + path + "' does not match the gate set");
  }
  Vector mean(p);
  Matrix factor(p, r);
  in.read(reinterpret_cast<char*>(mean.data()), sizeof(double) * p);
  in.read(reinterpret_cast<char*>(factor.data()), sizeof(double) * p * r);
  if (!in) throw DataError("belief file '" + path + "' is truncated");
  return GaussianBelief(std::move(mean), std::move(factor), packing);
}

}  // namespace fbt
