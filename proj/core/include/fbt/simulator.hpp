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

// Synthetic device: a hidden noisy gate set that returns multinomial counts.

#include <cstdint>
#include <string>
#include <vector>

#include "fbt/bayes.hpp"
#include "fbt/forward_model.hpp"
#include "fbt/gateset.hpp"
#include "fbt/records.hpp"

namespace fbt {

enum class NoiseKind {
  kIdentity,
  kDepolarizing,          // p
  kCoherentOverrotation,  // axis (Pauli label), theta
  kAmplitudeDamping,      // gamma, qubit (-1 = every qubit)
  kAssignment,            // classical confusion matrix Q, Q(i, j) = P(i | j)
  kComposite,             // components applied in order
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kIdentity;
  double p = 0.0;
  std::string axis;
  double theta = 0.0;
  double gamma = 0.0;
  int qubit = -1;
  Matrix confusion;
  std::vector<NoiseSpec> components;
};

// CPTP noise channel on n_qubits. Throws ValidationError for invalid params.
PauliTransferMatrix make_noise_model(const NoiseSpec& spec, int n_qubits);

class TrueDevice {
 public:
  // Throws ValidationError if any truth channel has a Choi eigenvalue below
  // -1e-9.
  TrueDevice(GateSet truth, uint64_t seed, int64_t default_shots = 125);

  const GateSet& truth() const { return truth_; }
  uint64_t seed() const { return seed_; }
  int64_t default_shots() const { return default_shots_; }

  // Born probabilities; entries above -1e-12 are clipped and renormalised,
  // anything more negative is a NumericalError.
  Vector probabilities(const Sequence& seq) const;

  // Counts for one setting. The random stream is derived from (seed, stream,
  // sequence), so equal arguments always give equal counts.
  ExperimentRecord measure(const Sequence& seq, int64_t shots, uint64_t stream = 0,
                           bool keep_true_probs = false) const;

  // One record per sequence, stream = position in the list.
  std::vector<ExperimentRecord> measure_all(const std::vector<Sequence>& seqs,
                                            int64_t shots) const;

 private:
  GateSet truth_;
  uint64_t seed_;
  int64_t default_shots_;
};

// Counts ~ Multinomial(shots, p).
std::vector<int64_t> sample_multinomial(const Vector& p, int64_t shots, Rng& rng);

// Uniformly random primitive words whose lengths are stratified evenly over
// 0..max_length (the stratum of setting k is k mod (max_length + 1)); the
// order is shuffled.
std::vector<Sequence> generate_tomography_settings(int max_length, int n_settings,
                                                   int num_gates, Rng& rng);

// Hash of a gate sequence, used to derive per-call random streams.
uint64_t sequence_hash(const Sequence& seq);

}  // namespace fbt
