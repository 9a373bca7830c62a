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
#pragma once

// JSON encodings of channels, gate sets, noise models and run configurations,
// plus a binary belief format. Parse failures throw ConfigError; JSON syntax
// errors name the line and column.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbt/bayes.hpp"
#include "fbt/gateset.hpp"
#include "fbt/ptm.hpp"
#include "fbt/simulator.hpp"

namespace fbt {

inline constexpr const char* kVersion = "0.1.0";

// {"n_qubits": n, "entries": [row-major reals]}
std::string ptm_to_json(const PauliTransferMatrix& ptm);
PauliTransferMatrix ptm_from_json(const std::string& text);

// {"builtin": "native_two_qubit"} or an explicit list of gates with ideal
// unitaries as [re, im] pairs, plus SPAM inclusion flags.
GateSet gateset_from_json(const std::string& text);
NoiseSpec noise_spec_from_json(const std::string& text);

// Noise per gate name; gates not listed get default_gate.
struct TruthSpec {
  std::map<std::string, NoiseSpec> gates;
  NoiseSpec default_gate;
  NoiseSpec meas;
  NoiseSpec prep;
};
TruthSpec truth_spec_from_json(const std::string& text);
// Throws ConfigError for gate names missing from the gate set.
GateSet apply_truth(const GateSet& ideal, const TruthSpec& truth);

struct SimulateConfig {
  GateSet gateset;
  TruthSpec truth;
  int n_settings = 7140;
  int max_length = 14;
  int64_t shots = 125;
  uint64_t seed = 1;
  std::string output = "dataset.jsonl";
  std::string truth_output;  // defaults to <output>.truth.json
  std::string config_hash;
};

struct RbPriorConfig {
  double fidelity = 0.0;
  double sigma = 0.0;
  int n_samples = 200;
  double floor_sigma = 0.005;
};

struct FitConfig {
  GateSet gateset;
  std::string dataset;
  PriorSpec prior;
  EngineOptions engine;
  std::optional<RbPriorConfig> rb_prior;
  int metrics_samples = 200;
  std::string output_dir = "fbt_report";
  bool emit_diagnostics = false;
  FidelityConvention convention = FidelityConvention::kAverage;
  uint64_t seed = 1;
  std::string config_hash;
};

struct RbConfig {
  GateSet gateset;
  TruthSpec truth;
  std::vector<int> lengths;
  int sequences_per_length = 20;
  int64_t shots = 125;
  uint64_t seed = 1;
  std::string output = "rb.jsonl";
  // Also run an FBT fit on the RB records.
  bool repurpose = false;
  FitConfig fit;  // used when repurposing; dataset is ignored
  std::string config_hash;
};

SimulateConfig simulate_config_from_json(const std::string& text);
FitConfig fit_config_from_json(const std::string& text);
RbConfig rb_config_from_json(const std::string& text);

// Reads a whole file; ConfigError if it cannot be opened.
std::string read_text_file(const std::string& path);

// Binary belief file: mean and covariance factor.
void save_belief(const std::string& path, const GaussianBelief& belief);
GaussianBelief load_belief(const std::string& path, const ParameterPacking& packing);

}  // namespace fbt
