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
#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <vector>

#include "fbt/analysis.hpp"
#include "fbt/bayes.hpp"
#include "fbt/physicality.hpp"
#include "fbt/simulator.hpp"
#include "oracles.hpp"

namespace fbt {
namespace {

NoiseSpec dep(double p) {
  NoiseSpec s;
  s.kind = NoiseKind::kDepolarizing;
  s.p = p;
  return s;
}

NoiseSpec rot(const char* axis, double theta) {
  NoiseSpec s;
  s.kind = NoiseKind::kCoherentOverrotation;
  s.axis = axis;
  s.theta = theta;
  return s;
}

NoiseSpec both(NoiseSpec a, NoiseSpec b) {
  NoiseSpec s;
  s.kind = NoiseKind::kComposite;
  s.components = {a, b};
  return s;
}

double width(const Interval& i) { return i.hi - i.lo; }

TEST(IntervalProperty, ShrinkAlongRun) {
  const GateSet ideal = single_qubit_xy_gate_set();
  GateSet truth = ideal;
  truth.gates[0].noise = make_noise_model(both(dep(0.02), rot("X", 0.05)), 1);
  truth.gates[1].noise = make_noise_model(dep(0.01), 1);
  const TrueDevice dev(truth, 5);
  Rng rng(6);
  const auto recs = dev.measure_all(generate_tomography_settings(8, 1600, 2, rng), 500);

  OnlineEstimator engine(default_prior(ideal), ideal);
  const std::vector<size_t> checkpoints = {50, 200, 800, 1600};
  std::vector<double> traces;
  std::vector<MetricsResult> metrics;
  size_t next = 0;
  for (size_t i = 0; i < recs.size(); ++i) {
    engine.update(recs[i]);
    if (next < checkpoints.size() && i + 1 == checkpoints[next]) {
      traces.push_back(engine.belief().trace());
      MetricsOptions mo;
      mo.seed = 40 + next;
      metrics.push_back(gate_metrics_with_intervals(engine.belief(), ideal, mo));
      ++next;
    }
  }
  ASSERT_EQ(metrics.size(), checkpoints.size());
  for (size_t k = 1; k < metrics.size(); ++k) {
    EXPECT_LT(traces[k], traces[k - 1]);
    for (size_t g = 0; g < metrics[k].gates.size(); ++g) {
      const auto& now = metrics[k].gates[g];
      const auto& before = metrics[k - 1].gates[g];
      EXPECT_LE(width(now.infidelity), 1.1 * width(before.infidelity))
          << now.name << " checkpoint " << checkpoints[k];
      EXPECT_LE(width(now.incoherence), 1.1 * width(before.incoherence))
          << now.name << " checkpoint " << checkpoints[k];
    }
  }
}

// <psi| rho |psi> of a Bell word without requiring rho to be PSD, so
// unprojected posterior samples can be scored.
double bell_fidelity(const GateSet& gs, BellState b) {
  Vector r = gs.rho0.coefficients();
  for (const auto& name : bell_circuit(b)) r = gs.gates[gs.gate_index(name)].noisy().entries() * r;
  const oracle::CVec psi = bell_ket(b);
  const oracle::Vec o = oracle::coefficients(psi * psi.adjoint());
  // Library and oracle coefficients differ at most by a common scale,
  // fixed by the identity component of a unit-trace state.
  return r.dot(o) * 0.5 / r(0);
}

// 95% band of the Bell fidelities over posterior samples.
std::array<std::pair<double, double>, 4> bell_band(const GaussianBelief& belief,
                                                   const GateSet& like, int n, Rng& rng) {
  std::array<std::vector<double>, 4> f;
  const Matrix dev = belief.sample_deviations(n, rng);
  for (int s = 0; s < n; ++s) {
    const GateSet g = unpack(belief.mean() + dev.col(s), like, belief.packing());
    for (int b = 0; b < 4; ++b) f[b].push_back(bell_fidelity(g, static_cast<BellState>(b)));
  }
  std::array<std::pair<double, double>, 4> out;
  for (int b = 0; b < 4; ++b) {
    std::sort(f[b].begin(), f[b].end());
    const auto at = [&](double q) { return f[b][static_cast<size_t>(q * (n - 1) + 0.5)]; };
    out[b] = {at(0.025), at(0.975)};
  }
  return out;
}

TEST(BellProperty, FidelityHelperMatchesLibrary) {
  GateSet g = native_two_qubit_gate_set();
  for (auto& gate : g.gates)
    if (!gate.is_virtual) gate.noise = make_noise_model(both(dep(0.02), rot("XY", 0.1)), 2);
  const auto lib = bell_state_tomography(g);
  for (int b = 0; b < 4; ++b)
    EXPECT_NEAR(bell_fidelity(g, static_cast<BellState>(b)), lib[b].fidelity, 1e-12);
}

TEST(BellProperty, TruthInsidePredictiveBand) {
  const GateSet ideal = native_two_qubit_gate_set();
  GateSet truth = ideal;
  for (auto& g : truth.gates)
    if (!g.is_virtual) g.noise = make_noise_model(dep(0.01), 2);
  truth.gates[truth.gate_index("U2_dn")].noise =
      make_noise_model(both(dep(0.01), rot("IX", 0.04)), 2);
  const auto truth_bell = bell_state_tomography(truth);

  int inside = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    const TrueDevice dev(truth, 300 + r);
    Rng rng(400 + r);
    const auto recs = dev.measure_all(generate_tomography_settings(6, 300, 6, rng), 1000);
    const GaussianBelief post = run_online(default_prior(ideal), recs, ideal).belief;
    const auto band = bell_band(post, ideal, 400, rng);
    const auto pmap = bell_state_tomography(pmap_estimate(post, ideal));
    bool ok = true;
    for (int b = 0; b < 4; ++b) {
      ok = ok && truth_bell[b].fidelity >= band[b].first && truth_bell[b].fidelity <= band[b].second;
      ok = ok && pmap[b].fidelity >= band[b].first && pmap[b].fidelity <= band[b].second;
    }
    inside += ok ? 1 : 0;
  }
  std::printf("truth and PMAP Bell fidelities inside the band in %d/%d runs\n", inside, runs);
  EXPECT_GE(inside, 18);
}

}  // namespace
}  // namespace fbt
