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
#include "fbt/analysis.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fbt/error.hpp"
#include "fbt/physicality.hpp"
#include "json.hpp"

namespace fbt {

namespace {

Interval summarize(const std::vector<double>& v) {
  Interval out;
  if (v.empty()) return out;
  double s = 0.0;
  for (double x : v) s += x;
  out.mean = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  out.lo = out.mean - 2.0 * out.std;
  out.hi = out.mean + 2.0 * out.std;
  return out;
}

}  // namespace

MetricsResult gate_metrics_with_intervals(const GaussianBelief& belief, const GateSet& like,
                                          const MetricsOptions& options) {
  if (options.n_samples < 100) throw ValidationError("n_samples must be >= 100");
  const int ng = like.num_gates();
  Rng rng(options.seed);
  const Matrix dev = belief.sample_deviations(options.n_samples, rng);
  std::vector<std::vector<double>> inf(ng), inc(ng), uni(ng);
  MetricsResult out;
  for (int s = 0; s < options.n_samples; ++s) {
    const Vector lambda = belief.mean() + dev.col(s);
    for (int g = 0; g < ng; ++g) {
      const PauliTransferMatrix raw =
          unpack_channel(lambda, belief.packing().gate_channel(g), like.n_qubits);
      const auto [ch, rep] = project_cptp(raw);
      if (!rep.converged) ++out.projection_failures;
      inf[g].push_back(1.0 - fidelity(ch, options.convention));
      const Coherence c = unitarity_and_incoherence(ch);
      inc[g].push_back(c.incoherence);
      uni[g].push_back(c.unitarity);
    }
  }
  for (int g = 0; g < ng; ++g) {
    out.gates.push_back(
        GateMetrics{like.gates[g].name, summarize(inf[g]), summarize(inc[g]), summarize(uni[g])});
  }
  return out;
}

const char* to_string(BellState s) {
  switch (s) {
    case BellState::kPhiPlus: return "phi_plus";
    case BellState::kPhiMinus: return "phi_minus";
    case BellState::kPsiPlus: return "psi_plus";
    case BellState::kPsiMinus: return "psi_minus";
  }
  return "?";
}

CVector bell_ket(BellState s) {
  CVector k = CVector::Zero(4);
  const double h = 1.0 / std::sqrt(2.0);
  switch (s) {
    case BellState::kPhiPlus: k(0) = h; k(3) = h; break;
    case BellState::kPhiMinus: k(0) = h; k(3) = -h; break;
    case BellState::kPsiPlus: k(1) = h; k(2) = h; break;
    case BellState::kPsiMinus: k(1) = h; k(2) = -h; break;
  }
  return k;
}

const std::vector<std::string>& bell_circuit(BellState s) {
  // X90 on qubit 1, CROT_pi on qubit 2 (a CNOT in this convention), then a
  // virtual Z to fix the relative phase.
  static const std::vector<std::string> phi_plus = {"U1_dn", "U1_up", "U2_dn", "U2_dn", "Z1"};
  static const std::vector<std::string> phi_minus = {"U1_dn", "U1_up", "U2_dn", "U2_dn",
                                                     "Z1",    "Z1",    "Z1"};
  static const std::vector<std::string> psi_plus = {"U1_dn", "U1_up", "U2_up", "U2_up", "Z1"};
  static const std::vector<std::string> psi_minus = {"U1_dn", "U1_up", "U2_up", "U2_up", "Z2"};
  switch (s) {
    case BellState::kPhiPlus: return phi_plus;
    case BellState::kPhiMinus: return phi_minus;
    case BellState::kPsiPlus: return psi_plus;
    case BellState::kPsiMinus: return psi_minus;
  }
  return phi_plus;
}

DensityState prepare_state(const GateSet& gateset, const std::vector<std::string>& word) {
  Vector state = gateset.rho0.coefficients();
  for (const std::string& name : word) {
    const int g = gateset.gate_index(name);
    state = gateset.gates[g].noisy().entries() * state;
  }
  return DensityState(gateset.n_qubits, state);
}

std::array<BellMetrics, 4> bell_state_tomography(const GateSet& estimate) {
  if (estimate.n_qubits != 2) throw ValidationError("Bell tomography needs two qubits");
  std::array<BellMetrics, 4> out{};
  const BellState all[] = {BellState::kPhiPlus, BellState::kPhiMinus, BellState::kPsiPlus,
                           BellState::kPsiMinus};
  for (int i = 0; i < 4; ++i) {
    const DensityState rho = prepare_state(estimate, bell_circuit(all[i]));
    const StateMetrics m =
        state_fidelity_and_concurrence(rho, DensityState::from_ket(bell_ket(all[i])));
    out[i] = BellMetrics{all[i], m.fidelity, m.concurrence};
  }
  return out;
}

Matrix readout_assignment_matrix(const PauliTransferMatrix& meas_noise, const Povm& povm) {
  const int n = povm.n_qubits();
  if (meas_noise.n_qubits() != n) throw ValidationError("channel and POVM sizes differ");
  const int d = 1 << n;
  const Matrix em = povm.effects() * meas_noise.entries();
  Matrix out(povm.num_outcomes(), d);
  for (int j = 0; j < d; ++j) {
    out.col(j) = em * DensityState::basis(n, j).coefficients();
  }
  return out;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson interval_json(const Interval& iv) {
  return ojson{{"mean", iv.mean}, {"std", iv.std}, {"lo", iv.lo}, {"hi", iv.hi}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::string report_to_json(const FitReport& r) {
  ojson j;
  j["version"] = r.version;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["fidelity_convention"] = to_string(r.convention);
  j["settings"] = r.diagnostics.size();
  j["dominance_step"] = r.dominance_step;
  j["initial_trace"] = r.initial_trace;
  j["final_trace"] = r.final_trace;
  ojson gates = ojson::array();
  for (int g = 0; g < r.estimate.num_gates(); ++g) {
    const PauliTransferMatrix& ch = r.estimate.gates[g].noise;
    const GateFidelity f = gate_fidelity(ch);
    const Coherence c = unitarity_and_incoherence(ch);
    ojson gj;
    gj["name"] = r.estimate.gates[g].name;
    gj["average_fidelity"] = f.average;
    gj["normalized_trace_fidelity"] = f.normalized_trace;
    gj["unitarity"] = c.unitarity;
    gj["incoherence"] = c.incoherence;
    if (g < static_cast<int>(r.metrics.gates.size())) {
      const GateMetrics& m = r.metrics.gates[g];
      gj["infidelity_interval"] = interval_json(m.infidelity);
      gj["incoherence_interval"] = interval_json(m.incoherence);
      gj["unitarity_interval"] = interval_json(m.unitarity);
    }
    gj["noise_ptm"] = matrix_json(ch.entries());
    gj["mean_noise_ptm"] = matrix_json(r.mean.gates[g].noise.entries());
    gates.push_back(std::move(gj));
  }
  j["gates"] = std::move(gates);
  j["meas_noise_ptm"] = matrix_json(r.estimate.meas_noise.entries());
  j["assignment_matrix"] = matrix_json(r.assignment);
  j["projection_failures"] = r.metrics.projection_failures;
  if (r.estimate.n_qubits == 2) {
    ojson bell = ojson::array();
    for (const BellMetrics& b : r.bell) {
      bell.push_back({{"state", to_string(b.state)},
                      {"fidelity", b.fidelity},
                      {"concurrence", b.concurrence}});
    }
    j["bell"] = std::move(bell);
  }
  return j.dump(2);
}

void write_report_bundle(const std::string& dir, const FitReport& r) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create '" + dir + "': " + ec.message());
  const fs::path base(dir);
  write_file(base / "report.json", report_to_json(r) + "\n");

  std::ostringstream conv;
  conv << std::setprecision(10);
  conv << "step,trace_post,trace_eps,approx_err,dominance,sampled,wall_time\n";
  for (const UpdateDiagnostics& d : r.diagnostics) {
    conv << d.step << ',' << d.trace_post << ',' << d.trace_eps << ',';
    if (d.approx_error) conv << *d.approx_error;
    conv << ',' << int(d.dominance) << ',' << int(d.sampled) << ',' << d.wall_time << '\n';
  }
  write_file(base / "convergence.csv", conv.str());

  std::ostringstream met;
  met << std::setprecision(10);
  met << "gate,infidelity,infidelity_lo,infidelity_hi,incoherence,incoherence_lo,"
         "incoherence_hi\n";
  for (const GateMetrics& m : r.metrics.gates) {
    met << m.name << ',' << m.infidelity.mean << ',' << m.infidelity.lo << ','
        << m.infidelity.hi << ',' << m.incoherence.mean << ',' << m.incoherence.lo << ','
        << m.incoherence.hi << '\n';
  }
  write_file(base / "metrics.csv", met.str());

  // Residuals I - Lambda for every estimated channel, one row per entry.
  std::ostringstream res;
  res << std::setprecision(10);
  res << "channel,row,col,residual\n";
  auto dump = [&](const std::string& name, const PauliTransferMatrix& ch) {
    const Matrix d = Matrix::Identity(ch.size(), ch.size()) - ch.entries();
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index k = 0; k < d.cols(); ++k)
        res << name << ',' << i << ',' << k << ',' << d(i, k) << '\n';
  };
  for (const NoisyGate& g : r.estimate.gates) dump(g.name, g.noise);
  dump("meas", r.estimate.meas_noise);
  write_file(base / "residuals.csv", res.str());

  if (r.estimate.n_qubits == 2) {
    std::ostringstream bell;
    bell << std::setprecision(10) << "state,fidelity,concurrence\n";
    for (const BellMetrics& b : r.bell) {
      bell << to_string(b.state) << ',' << b.fidelity << ',' << b.concurrence << '\n';
    }
    write_file(base / "bell.csv", bell.str());
  }
}

}  // namespace fbt
