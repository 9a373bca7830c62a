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

// Derived results from an estimate: gate metrics with credible intervals,
// Bell-state tomography, the readout assignment matrix and report files.

#include <array>
#include <string>
#include <vector>

#include "fbt/bayes.hpp"
#include "fbt/gateset.hpp"
#include "fbt/ptm.hpp"
#include "fbt/rb.hpp"

namespace fbt {

// mean +/- 2 standard deviations over posterior samples.
struct Interval {
  double mean = 0.0;
  double std = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct GateMetrics {
  std::string name;
  Interval infidelity;   // 1 - F in the chosen convention
  Interval incoherence;  // (d-1)/d (1 - sqrt(u))
  Interval unitarity;
};

struct MetricsOptions {
  int n_samples = 200;
  FidelityConvention convention = FidelityConvention::kAverage;
  uint64_t seed = 1;
};

struct MetricsResult {
  std::vector<GateMetrics> gates;
  int projection_failures = 0;  // samples whose projection did not converge
};

// Samples gate sets from the posterior, projects every gate noise channel
// onto CPTP and summarises the per-sample metrics. Throws ValidationError
// for n_samples < 100.
MetricsResult gate_metrics_with_intervals(const GaussianBelief& belief, const GateSet& like,
                                          const MetricsOptions& options = {});

enum class BellState { kPhiPlus, kPhiMinus, kPsiPlus, kPsiMinus };

const char* to_string(BellState s);
CVector bell_ket(BellState s);
// Native-gate preparation word for a Bell state from |00>, by gate name.
const std::vector<std::string>& bell_circuit(BellState s);

struct BellMetrics {
  BellState state;
  double fidelity = 0.0;
  double concurrence = 0.0;
};

// Applies the noisy gates of the estimate along each Bell circuit, starting
// from the ideal rho0, and scores the output state.
std::array<BellMetrics, 4> bell_state_tomography(const GateSet& estimate);

// Output state of a named gate word applied to rho0 (gate noise only).
DensityState prepare_state(const GateSet& gateset, const std::vector<std::string>& word);

// Entry (i, j): probability of outcome i when basis state j is prepared and
// meas_noise acts before the POVM.
Matrix readout_assignment_matrix(const PauliTransferMatrix& meas_noise, const Povm& povm);

// Everything needed to write a report bundle.
struct FitReport {
  GateSet estimate;  // PMAP
  GateSet mean;      // unprojected posterior mean
  MetricsResult metrics;
  std::array<BellMetrics, 4> bell{};
  Matrix assignment;
  std::vector<UpdateDiagnostics> diagnostics;
  int dominance_step = 0;
  double initial_trace = 0.0;
  double final_trace = 0.0;
  FidelityConvention convention = FidelityConvention::kAverage;
  std::string version;
  uint64_t seed = 0;
  std::string config_hash;
};

// Writes report.json, convergence.csv, metrics.csv, residuals.csv and
// bell.csv into dir (created if missing). Throws ConfigError on I/O failure.
void write_report_bundle(const std::string& dir, const FitReport& report);

std::string report_to_json(const FitReport& report);

}  // namespace fbt
