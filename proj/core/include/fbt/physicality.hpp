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

// Projections onto physical channels and the projected point estimate.
// Distances are Frobenius norms in the PTM picture; the Choi map is a scaled
// isometry (||J||_F = ||Lambda||_F / d) so the nearest point is the same in
// both pictures.

#include <utility>
#include <vector>

#include "fbt/bayes.hpp"
#include "fbt/gateset.hpp"
#include "fbt/ptm.hpp"

namespace fbt {

struct ProjectionOptions {
  int max_iter = 5000;
  // Stop once successive iterates differ by less than this (Frobenius).
  double tol = 1e-10;
};

struct ProjectionReport {
  int iterations = 0;
  double final_distance = 0.0;  // from the input
  double min_choi_eig = 0.0;    // of the output, unit-trace Choi normalisation
  bool converged = false;
};

// Nearest CPTP channel by Dykstra's alternating projections between the CP
// cone (Choi eigenvalue clipping) and the TP affine set. The output is exactly
// TP. Non-convergence is reported, not thrown.
std::pair<PauliTransferMatrix, ProjectionReport> project_cptp(
    const PauliTransferMatrix& channel, const ProjectionOptions& options = {});

// Projection onto the CP cone alone (symmetrised Choi, negative eigenvalues
// clipped). Exposed for tests.
PauliTransferMatrix project_cp(const PauliTransferMatrix& channel);

struct FidelityProjectionOptions {
  ProjectionOptions projection;
  FidelityConvention convention = FidelityConvention::kAverage;
};

struct GateSetProjection {
  GateSet gateset;
  ProjectionReport report;  // of the gate noise channels jointly
};

// Nearest gate set (summed Frobenius norm over gate noise channels) whose
// gate noise channels are CPTP with mean fidelity f. SPAM channels are only
// projected onto CPTP. Throws ValidationError unless 1/d < f <= 1 (f above
// the completely depolarising value) in the average convention; the
// normalised-trace convention uses the equivalent trace range.
GateSetProjection project_gateset_with_fidelity(const GateSet& gateset, double f,
                                                const FidelityProjectionOptions& options = {});

// Unpacks the belief mean and projects every estimated channel onto CPTP.
GateSet pmap_estimate(const GaussianBelief& belief, const GateSet& like,
                      std::vector<ProjectionReport>* reports = nullptr);

}  // namespace fbt
