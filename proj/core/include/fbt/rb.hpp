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

// Two-qubit randomized benchmarking: sequence generation over the compiled
// Clifford group, decay fitting, the RB-informed prior and reuse of RB data
// as tomography records.

#include <cstdint>
#include <vector>

#include "fbt/bayes.hpp"
#include "fbt/clifford.hpp"
#include "fbt/physicality.hpp"
#include "fbt/records.hpp"
#include "fbt/simulator.hpp"

namespace fbt {

struct RbSequence {
  int clifford_length = 0;
  std::vector<int> cliffords;  // indices into CliffordGroup::two_qubit()
  Sequence word;               // concatenated primitive words
};

// n_per_length sequences for every length L >= 1: L - 1 uniform Cliffords and
// a final Clifford drawn uniformly from those returning the ideal state to
// |00>. Throws ValidationError for L < 1.
std::vector<RbSequence> sample_rb_sequences(int n_per_length, const std::vector<int>& lengths,
                                            Rng& rng);

struct RbDataset {
  std::vector<int> lengths;
  std::vector<ExperimentRecord> records;  // clifford_length set; outcome 0 = survival
};

RbDataset simulate_rb_dataset(const TrueDevice& device,
                              const std::vector<RbSequence>& sequences, int64_t shots);

struct RbFit {
  double a = 0.0;
  double b = 0.0;
  double p = 0.0;  // decay per Clifford
  double r_c = 0.0;
  double r_c_err = 0.0;
  double primitive_fidelity = 0.0;
  double primitive_fidelity_err = 0.0;
  double mean_primitives = 0.0;
  Matrix covariance;  // (A, p, B), residual scaled
  Vector residuals;
  int iterations = 0;
};

// Least-squares fit of P = A p^L + B with p = 1 - d/(d-1) r_C. The primitive
// fidelity is 1 - (d-1)/d (1 - p^(1/n)) with n the mean primitive count per
// Clifford; its error follows from the delta method. Throws ValidationError
// for fewer than 3 distinct lengths and NumericalError if the fit diverges.
RbFit fit_rb_decay(const std::vector<double>& lengths, const std::vector<double>& survival,
                   double mean_primitives, int dim = 4);
RbFit fit_rb_decay(const RbDataset& dataset, double mean_primitives, int dim = 4);

struct RbPriorOptions {
  int n_samples = 200;
  FidelityProjectionOptions projection;
  // Independent per-coordinate sigma added to the sample covariance so the
  // prior keeps full rank when n_samples < P. 0 keeps the plain sample
  // covariance.
  double floor_sigma = 0.0;
  uint64_t seed = 1;
};

// Sample f ~ N(f_mean, sigma_f^2) and a gate set from the belief, project the
// gate set onto CPTP maps with mean fidelity f, and return the sample mean
// and covariance of the projected parameters. f draws outside the feasible
// range are redrawn; 100 consecutive failures throw ValidationError.
GaussianBelief rb_prior_update(const GaussianBelief& belief, const GateSet& like,
                               double f_mean, double sigma_f,
                               const RbPriorOptions& options = {});

std::vector<ExperimentRecord> rb_to_fbt_records(const RbDataset& dataset);

}  // namespace fbt
