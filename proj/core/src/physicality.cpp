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
#include "fbt/physicality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "fbt/error.hpp"

namespace fbt {

namespace {

struct CpStep {
  PauliTransferMatrix ptm;
  double min_eig;  // before clipping
};

CpStep cp_step(const PauliTransferMatrix& channel) {
  CMatrix choi = ptm_to_choi(channel);
  choi = 0.5 * (choi + choi.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(choi);
  const Vector& w = eig.eigenvalues();
  const double min_eig = w.minCoeff();
  if (min_eig >= 0.0) return {channel, min_eig};
  const CMatrix& v = eig.eigenvectors();
  CMatrix clipped = v * w.cwiseMax(0.0).cast<Complex>().asDiagonal() * v.adjoint();
  return {choi_to_ptm(clipped, channel.n_qubits()), min_eig};
}

void set_tp_row(Matrix& m) {
  m.row(0).setZero();
  m(0, 0) = 1.0;
}

}  // namespace

PauliTransferMatrix project_cp(const PauliTransferMatrix& channel) {
  return cp_step(channel).ptm;
}

std::pair<PauliTransferMatrix, ProjectionReport> project_cptp(
    const PauliTransferMatrix& channel, const ProjectionOptions& options) {
  if (options.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  const int n = channel.n_qubits();
  Matrix x = channel.entries();
  set_tp_row(x);
  Matrix p = Matrix::Zero(x.rows(), x.cols());
  ProjectionReport report;
  for (int it = 1; it <= options.max_iter; ++it) {
    const Matrix y = cp_step(PauliTransferMatrix(n, x + p)).ptm.entries();
    p = x + p - y;
    // The TP set is affine, so it needs no correction term.
    Matrix next = y;
    set_tp_row(next);
    const double step = (next - x).norm();
    x = std::move(next);
    report.iterations = it;
    if (step < options.tol) {
      report.converged = true;
      break;
    }
  }
  PauliTransferMatrix out(n, std::move(x));
  report.final_distance = frobenius_distance(out, channel);
  report.min_choi_eig = min_choi_eigenvalue(out);
  return {std::move(out), report};
}

GateSetProjection project_gateset_with_fidelity(const GateSet& gateset, double f,
                                                const FidelityProjectionOptions& options) {
  const int ng = gateset.num_gates();
  if (ng < 1) throw ValidationError("gate set has no gates");
  const int n = gateset.n_qubits;
  const int d = 1 << n;
  const int n2 = d * d;
  const double target_trace = trace_for_fidelity(f, d, options.convention);
  if (!std::isfinite(f) || !(target_trace > 1.0 + 1e-12) ||
      target_trace > n2 + 1e-12) {
    throw ValidationError("fidelity " + std::to_string(f) +
                          " is outside the feasible range above the completely "
                          "depolarising value");
  }
  const double diag_target = ng * (std::min(target_trace, double(n2)) - 1.0);

  // Affine set: TP rows and sum over gates of the unital-block trace fixed.
  auto affine = [&](std::vector<Matrix>& xs) {
    double s = 0.0;
    for (Matrix& m : xs) {
      set_tp_row(m);
      s += m.trace() - 1.0;
    }
    const double shift = (diag_target - s) / (ng * (n2 - 1));
    for (Matrix& m : xs) m.diagonal().tail(n2 - 1).array() += shift;
  };

  std::vector<Matrix> x(ng), p(ng);
  for (int g = 0; g < ng; ++g) {
    x[g] = gateset.gates[g].noise.entries();
    p[g] = Matrix::Zero(n2, n2);
  }
  affine(x);

  ProjectionReport report;
  const ProjectionOptions& po = options.projection;
  for (int it = 1; it <= po.max_iter; ++it) {
    std::vector<Matrix> y(ng);
    for (int g = 0; g < ng; ++g) {
      y[g] = cp_step(PauliTransferMatrix(n, x[g] + p[g])).ptm.entries();
      p[g] = x[g] + p[g] - y[g];
    }
    affine(y);
    double step2 = 0.0;
    for (int g = 0; g < ng; ++g) step2 += (y[g] - x[g]).squaredNorm();
    x = std::move(y);
    report.iterations = it;
    if (std::sqrt(step2) < po.tol) {
      report.converged = true;
      break;
    }
  }

  GateSetProjection out{gateset, report};
  double dist2 = 0.0;
  double min_eig = 1.0;
  for (int g = 0; g < ng; ++g) {
    PauliTransferMatrix ch(n, std::move(x[g]));
    dist2 += (ch.entries() - gateset.gates[g].noise.entries()).squaredNorm();
    min_eig = std::min(min_eig, min_choi_eigenvalue(ch));
    out.gateset.gates[g].noise = std::move(ch);
  }
  out.report.final_distance = std::sqrt(dist2);
  out.report.min_choi_eig = min_eig;
  if (gateset.estimate_meas_noise) {
    out.gateset.meas_noise = project_cptp(gateset.meas_noise, po).first;
  }
  if (gateset.estimate_prep_noise) {
    out.gateset.prep_noise = project_cptp(gateset.prep_noise, po).first;
  }
  return out;
}

GateSet pmap_estimate(const GaussianBelief& belief, const GateSet& like,
                      std::vector<ProjectionReport>* reports) {
  GateSet gs = belief.mean_gateset(like);
  if (reports) reports->clear();
  auto project = [&](PauliTransferMatrix& ch) {
    auto [proj, rep] = project_cptp(ch);
    ch = std::move(proj);
    if (reports) reports->push_back(rep);
  };
  for (NoisyGate& g : gs.gates) project(g.noise);
  if (gs.estimate_meas_noise) project(gs.meas_noise);
  if (gs.estimate_prep_noise) project(gs.prep_noise);
  return gs;
}

}  // namespace fbt
