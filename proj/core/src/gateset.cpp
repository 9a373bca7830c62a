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
#include "fbt/gateset.hpp"

#include <algorithm>
#include <cmath>

#include "fbt/error.hpp"

namespace fbt {

int GateSet::gate_index(std::string_view name) const {
  for (int i = 0; i < num_gates(); ++i) {
    if (gates[i].name == name) return i;
  }
  throw ValidationError("no gate named '" + std::string(name) + "'");
}

std::vector<std::string> GateSet::gate_names() const {
  std::vector<std::string> names;
  names.reserve(gates.size());
  for (const auto& g : gates) names.push_back(g.name);
  return names;
}

// --- ParameterPacking --------------------------------------------------------

int ParameterPacking::params_per_channel(int n_qubits) {
  const int n2 = 1 << (2 * n_qubits);
  return n2 * (n2 - 1);
}

ParameterPacking ParameterPacking::for_gateset(const GateSet& gateset) {
  ParameterPacking p;
  p.n_qubits_ = gateset.n_qubits;
  p.num_gates_ = gateset.num_gates();
  const int per = params_per_channel(gateset.n_qubits);
  auto add = [&](std::string name, ChannelKind kind, int gate) {
    p.channels_.push_back(ChannelSlice{std::move(name), kind, gate, p.total_, per});
    p.total_ += per;
  };
  for (int g = 0; g < gateset.num_gates(); ++g) {
    add(gateset.gates[g].name, ChannelKind::kGate, g);
  }
  if (gateset.estimate_meas_noise) {
    p.meas_ = static_cast<int>(p.channels_.size());
    add("meas", ChannelKind::kMeasurement, -1);
  }
  if (gateset.estimate_prep_noise) {
    p.prep_ = static_cast<int>(p.channels_.size());
    add("prep", ChannelKind::kPreparation, -1);
  }
  return p;
}

ParameterPacking ParameterPacking::flat(int total) {
  if (total < 1) throw ValidationError("flat packing needs a positive length");
  ParameterPacking p;
  p.total_ = total;
  return p;
}

const ChannelSlice& ParameterPacking::channel(std::string_view name) const {
  for (const auto& c : channels_) {
    if (c.name == name) return c;
  }
  throw ValidationError("no channel named '" + std::string(name) + "'");
}

const ChannelSlice* ParameterPacking::meas_channel() const {
  return meas_ < 0 ? nullptr : &channels_[meas_];
}

const ChannelSlice* ParameterPacking::prep_channel() const {
  return prep_ < 0 ? nullptr : &channels_[prep_];
}

bool ParameterPacking::operator==(const ParameterPacking& other) const {
  if (n_qubits_ != other.n_qubits_ || total_ != other.total_ ||
      channels_.size() != other.channels_.size()) {
    return false;
  }
  for (size_t i = 0; i < channels_.size(); ++i) {
    if (channels_[i].name != other.channels_[i].name ||
        channels_[i].offset != other.channels_[i].offset) {
      return false;
    }
  }
  return true;
}

PauliTransferMatrix unpack_channel(const Vector& lambda, const ChannelSlice& slice,
                                   int n_qubits) {
  const int n2 = 1 << (2 * n_qubits);
  if (slice.offset + slice.length > lambda.size() || slice.length != n2 * (n2 - 1)) {
    throw ValidationError("parameter vector does not match packing");
  }
  Matrix m(n2, n2);
  m.row(0).setZero();
  m(0, 0) = 1.0;
  for (int a = 1; a < n2; ++a) {
    m.row(a) = lambda.segment(slice.offset + (a - 1) * n2, n2).transpose();
  }
  return PauliTransferMatrix(n_qubits, std::move(m));
}

void pack_channel(const PauliTransferMatrix& ptm, const ChannelSlice& slice,
                  Vector& lambda) {
  const int n2 = ptm.size();
  if (slice.length != n2 * (n2 - 1) || slice.offset + slice.length > lambda.size()) {
    throw ValidationError("PTM does not match packing slice");
  }
  for (int a = 1; a < n2; ++a) {
    lambda.segment(slice.offset + (a - 1) * n2, n2) = ptm.entries().row(a).transpose();
  }
}

Vector pack(const GateSet& gateset, const ParameterPacking& packing) {
  if (packing.n_qubits() != gateset.n_qubits ||
      packing.num_gates() != gateset.num_gates()) {
    throw ValidationError("packing does not match gate set shape");
  }
  Vector lambda(packing.total());
  for (const auto& slice : packing.channels()) {
    switch (slice.kind) {
      case ChannelKind::kGate:
        pack_channel(gateset.gates[slice.gate].noise, slice, lambda);
        break;
      case ChannelKind::kMeasurement:
        pack_channel(gateset.meas_noise, slice, lambda);
        break;
      case ChannelKind::kPreparation:
        pack_channel(gateset.prep_noise, slice, lambda);
        break;
    }
  }
  return lambda;
}

Vector pack(const GateSet& gateset) {
  return pack(gateset, ParameterPacking::for_gateset(gateset));
}

GateSet unpack(const Vector& lambda, const GateSet& like,
               const ParameterPacking& packing) {
  if (lambda.size() != packing.total()) {
    throw ValidationError("parameter vector length " + std::to_string(lambda.size()) +
                          " does not match packing length " +
                          std::to_string(packing.total()));
  }
  if (packing.num_gates() != like.num_gates() || packing.n_qubits() != like.n_qubits) {
    throw ValidationError("packing does not match gate set shape");
  }
  GateSet out = like;
  for (const auto& slice : packing.channels()) {
    PauliTransferMatrix ptm = unpack_channel(lambda, slice, like.n_qubits);
    switch (slice.kind) {
      case ChannelKind::kGate: out.gates[slice.gate].noise = std::move(ptm); break;
      case ChannelKind::kMeasurement: out.meas_noise = std::move(ptm); break;
      case ChannelKind::kPreparation: out.prep_noise = std::move(ptm); break;
    }
  }
  return out;
}

// --- Builtin gates -----------------------------------------------------------

CMatrix x90_unitary() {
  const Complex a(0.5, 0.5), b(0.5, -0.5);
  CMatrix u(2, 2);
  u << a, b, b, a;
  return u;
}

CMatrix y90_unitary() { return pauli_rotation("Y", M_PI / 2); }

CMatrix z90_unitary() { return pauli_rotation("Z", M_PI / 2); }

CMatrix conditional_x90_unitary(int target, int control_state) {
  if ((target != 1 && target != 2) || (control_state != 0 && control_state != 1)) {
    throw ValidationError("conditional rotation needs target in {1,2} and control in {0,1}");
  }
  CMatrix u = CMatrix::Zero(4, 4);
  const CMatrix x = x90_unitary();
  // Basis index = 2 * q1 + q2.
  for (int c = 0; c < 2; ++c) {
    for (int ti = 0; ti < 2; ++ti) {
      for (int tj = 0; tj < 2; ++tj) {
        const Complex v = (c == control_state) ? x(ti, tj) : Complex(ti == tj ? 1.0 : 0.0);
        const int row = target == 1 ? 2 * ti + c : 2 * c + ti;
        const int col = target == 1 ? 2 * tj + c : 2 * c + tj;
        u(row, col) = v;
      }
    }
  }
  return u;
}

CMatrix local_z90_unitary(int qubit) {
  if (qubit != 1 && qubit != 2) throw ValidationError("qubit must be 1 or 2");
  return pauli_rotation(qubit == 1 ? "ZI" : "IZ", M_PI / 2);
}

namespace {

NoisyGate make_gate(std::string name, const CMatrix& u, bool is_virtual, int n) {
  return NoisyGate{std::move(name), unitary_to_ptm(u), PauliTransferMatrix::identity(n),
                   is_virtual, u};
}

}  // namespace

GateSet native_two_qubit_gate_set() {
  GateSet gs;
  gs.n_qubits = 2;
  gs.gates.push_back(make_gate("U1_dn", conditional_x90_unitary(1, 1), false, 2));
  gs.gates.push_back(make_gate("U1_up", conditional_x90_unitary(1, 0), false, 2));
  gs.gates.push_back(make_gate("Z1", local_z90_unitary(1), true, 2));
  gs.gates.push_back(make_gate("U2_dn", conditional_x90_unitary(2, 1), false, 2));
  gs.gates.push_back(make_gate("U2_up", conditional_x90_unitary(2, 0), false, 2));
  gs.gates.push_back(make_gate("Z2", local_z90_unitary(2), true, 2));
  gs.meas_noise = PauliTransferMatrix::identity(2);
  gs.prep_noise = PauliTransferMatrix::identity(2);
  gs.estimate_meas_noise = true;
  gs.estimate_prep_noise = false;
  gs.povm = Povm::computational(2);
  gs.rho0 = DensityState::basis(2, 0);
  return gs;
}

GateSet single_qubit_xy_gate_set() {
  GateSet gs;
  gs.n_qubits = 1;
  gs.gates.push_back(make_gate("Gx", x90_unitary(), false, 1));
  gs.gates.push_back(make_gate("Gy", y90_unitary(), false, 1));
  gs.meas_noise = PauliTransferMatrix::identity(1);
  gs.prep_noise = PauliTransferMatrix::identity(1);
  gs.estimate_meas_noise = false;
  gs.estimate_prep_noise = false;
  gs.povm = Povm::computational(1);
  gs.rho0 = DensityState::basis(1, 0);
  return gs;
}

GateSet builtin_gate_set(std::string_view name) {
  if (name == "native_two_qubit") return native_two_qubit_gate_set();
  if (name == "single_qubit_xy") return single_qubit_xy_gate_set();
  throw ConfigError("unknown builtin gate set '" + std::string(name) + "'");
}

}  // namespace fbt
