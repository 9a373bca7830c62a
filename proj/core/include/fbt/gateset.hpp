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

#include <string>
#include <string_view>
#include <vector>

#include "fbt/ptm.hpp"
#include "fbt/types.hpp"

namespace fbt {

// A primitive gate decomposed as noise * ideal.
struct NoisyGate {
  std::string name;
  PauliTransferMatrix ideal;
  // Trace-preserving noise channel applied after the ideal gate.
  PauliTransferMatrix noise;
  // Software frame changes (virtual Z) get a tighter default prior.
  bool is_virtual = false;
  // Ideal unitary when known (empty otherwise).
  CMatrix unitary;

  PauliTransferMatrix noisy() const { return noise * ideal; }
};

// Gates plus SPAM. The preparation is Lambda_rho |rho0>> and the readout is
// E Lambda_E, with E the POVM effect matrix.
struct GateSet {
  int n_qubits = 0;
  std::vector<NoisyGate> gates;
  PauliTransferMatrix meas_noise;
  PauliTransferMatrix prep_noise;
  // Whether the SPAM channels are unknowns (part of the parameter vector).
  bool estimate_meas_noise = true;
  bool estimate_prep_noise = false;
  Povm povm;
  DensityState rho0;

  int num_gates() const { return static_cast<int>(gates.size()); }
  int gate_index(std::string_view name) const;
  std::vector<std::string> gate_names() const;
};

enum class ChannelKind { kGate, kMeasurement, kPreparation };

struct ChannelSlice {
  std::string name;
  ChannelKind kind = ChannelKind::kGate;
  int gate = -1;  // gate index for kGate
  int offset = 0;
  int length = 0;
};

// Layout of the flat parameter vector: every estimated channel contributes
// rows 1..d^2-1 of its PTM in row-major order. Top rows are never stored.
class ParameterPacking {
 public:
  ParameterPacking() = default;
  static ParameterPacking for_gateset(const GateSet& gateset);
  // Unstructured vector of the given length, no channels. For toy problems.
  static ParameterPacking flat(int total);

  static int params_per_channel(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  int ptm_size() const { return 1 << (2 * n_qubits_); }
  int total() const { return total_; }
  int num_gates() const { return num_gates_; }
  const std::vector<ChannelSlice>& channels() const { return channels_; }
  const ChannelSlice& channel(std::string_view name) const;
  const ChannelSlice& gate_channel(int gate) const { return channels_[gate]; }
  // nullptr when the channel is not estimated.
  const ChannelSlice* meas_channel() const;
  const ChannelSlice* prep_channel() const;

  bool operator==(const ParameterPacking& other) const;

 private:
  int n_qubits_ = 0;
  int num_gates_ = 0;
  int total_ = 0;
  int meas_ = -1;
  int prep_ = -1;
  std::vector<ChannelSlice> channels_;
};

// Reads a channel out of the parameter vector, re-inserting the top row.
PauliTransferMatrix unpack_channel(const Vector& lambda, const ChannelSlice& slice,
                                   int n_qubits);
// Writes rows 1.. of ptm into the slice.
void pack_channel(const PauliTransferMatrix& ptm, const ChannelSlice& slice,
                  Vector& lambda);

Vector pack(const GateSet& gateset, const ParameterPacking& packing);
Vector pack(const GateSet& gateset);
// Returns a copy of like with every estimated channel replaced from lambda.
GateSet unpack(const Vector& lambda, const GateSet& like,
               const ParameterPacking& packing);

// --- Builtin gates -----------------------------------------------------------

// sqrt(X) = e^{i pi/4} exp(-i pi/4 X); its fourth power is exactly I.
CMatrix x90_unitary();
CMatrix y90_unitary();
// exp(-i pi/4 Z).
CMatrix z90_unitary();

// X90 on target (1-based qubit) when the other qubit of a two-qubit register
// is in control_state (0 = up, 1 = down); identity otherwise.
CMatrix conditional_x90_unitary(int target, int control_state);
// Z90 on one qubit of a two-qubit register.
CMatrix local_z90_unitary(int qubit);

// Six native primitives, in order: U1_dn, U1_up, Z1, U2_dn, U2_up, Z2, with
// identity noise, rho0 = |up,up>, computational readout, Lambda_E estimated.
GateSet native_two_qubit_gate_set();

// {Gx = X90, Gy = Y90} on one qubit, rho0 = |0>, computational readout, no
// SPAM unknowns.
GateSet single_qubit_xy_gate_set();

// Builds a gate set from a builtin identifier ("native_two_qubit" or
// "single_qubit_xy"). Throws ConfigError for unknown names.
GateSet builtin_gate_set(std::string_view name);

}  // namespace fbt
