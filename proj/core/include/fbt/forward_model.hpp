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

#include <span>
#include <vector>

#include "fbt/gateset.hpp"
#include "fbt/ptm.hpp"
#include "fbt/types.hpp"

namespace fbt {

// Gate indices into GateSet order, applied in time order (gates.front()
// acts first on the prepared state). Empty means prepare-and-measure.
struct Sequence {
  std::vector<int> gates;

  size_t size() const { return gates.size(); }
  bool empty() const { return gates.empty(); }
  bool operator==(const Sequence&) const = default;
};

// Throws ValidationError if an index is not < num_gates.
void validate_sequence(const Sequence& seq, int num_gates);

// Outcome probabilities E Lambda_E prod_i (Lambda_i G_i) Lambda_rho |rho0>>.
Vector exact_forward(const GateSet& gateset, const Sequence& seq);

// Same model with every estimated channel read from lambda.
Vector exact_forward(const Vector& lambda, const Sequence& seq, const GateSet& like,
                     const ParameterPacking& packing);

// First-order model around an expansion point lambda_bar:
//   m ~ m_bar + a_bar (lambda - lambda_bar).
struct LinearizedSetting {
  Sequence sequence;
  Vector expansion_point;
  Vector m_bar;
  // M x packing.total(); columns of channels absent from the sequence are 0.
  Matrix a_bar;
};

// Linearises around the channels of mean (packed with packing). Repeated
// occurrences of a gate accumulate into the same column block; estimated SPAM
// channels get the analogous first-order blocks.
LinearizedSetting linearize(const GateSet& mean, const ParameterPacking& packing,
                            const Sequence& seq);

// eta = exact_forward(sample) - (m_bar + a_bar (sample - lambda_bar)).
Vector approximation_error(const Vector& lambda_sample, const LinearizedSetting& setting,
                           const GateSet& like, const ParameterPacking& packing);

// Single-gate linear process tomography: value = <<effect| Lambda |input>>.
struct ProcessTomographySetting {
  DensityState input;
  Vector effect;
  double value = 0.0;
};

// Moore-Penrose least-squares estimate of the full PTM (top row included).
PauliTransferMatrix linear_process_tomography(
    std::span<const ProcessTomographySetting> settings, int n_qubits);

}  // namespace fbt
