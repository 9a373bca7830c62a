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
#include "fbt/forward_model.hpp"

#include <string>

#include "fbt/error.hpp"

namespace fbt {
namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Applies a TP channel whose rows 1.. are stored in lambda.
Vector apply_packed(const Vector& lambda, const ChannelSlice& slice, int n2,
                    const Vector& state) {
  Vector out(n2);
  out(0) = state(0);
  out.tail(n2 - 1).noalias() = RowMajorMap(lambda.data() + slice.offset, n2 - 1, n2) * state;
  return out;
}

// Resolves the measurement row-vectors E Lambda_E and the prepared state.
struct Spam {
  Matrix readout;  // M x d^2
  Vector prepared;
};

Spam spam_for(const GateSet& gs) {
  return Spam{gs.povm.effects() * gs.meas_noise.entries(),
              gs.prep_noise.entries() * gs.rho0.coefficients()};
}

}  // namespace

void validate_sequence(const Sequence& seq, int num_gates) {
  for (size_t k = 0; k < seq.gates.size(); ++k) {
    const int g = seq.gates[k];
    if (g < 0 || g >= num_gates) {
      throw ValidationError("sequence position " + std::to_string(k) +
                            " references gate " + std::to_string(g) + " but only " +
                            std::to_string(num_gates) + " gates exist");
    }
  }
}

Vector exact_forward(const GateSet& gateset, const Sequence& seq) {
  validate_sequence(seq, gateset.num_gates());
  const Spam spam = spam_for(gateset);
  Vector state = spam.prepared;
  for (int g : seq.gates) {
    const auto& gate = gateset.gates[g];
    state = gate.noise.entries() * (gate.ideal.entries() * state);
  }
  return spam.readout * state;
}

Vector exact_forward(const Vector& lambda, const Sequence& seq, const GateSet& like,
                     const ParameterPacking& packing) {
  if (lambda.size() != packing.total() || packing.num_gates() != like.num_gates()) {
    throw ValidationError("parameter vector does not match gate set packing");
  }
  validate_sequence(seq, like.num_gates());
  const int n2 = packing.ptm_size();
  Vector state = like.rho0.coefficients();
  if (const auto* prep = packing.prep_channel()) {
    state = apply_packed(lambda, *prep, n2, state);
  } else {
    state = like.prep_noise.entries() * state;
  }
  for (int g : seq.gates) {
    const Vector t = like.gates[g].ideal.entries() * state;
    state = apply_packed(lambda, packing.gate_channel(g), n2, t);
  }
  if (const auto* meas = packing.meas_channel()) {
    state = apply_packed(lambda, *meas, n2, state);
  } else {
    state = like.meas_noise.entries() * state;
  }
  return like.povm.effects() * state;
}

LinearizedSetting linearize(const GateSet& mean, const ParameterPacking& packing,
                            const Sequence& seq) {
  validate_sequence(seq, mean.num_gates());
  const int n2 = packing.ptm_size();
  const int m = mean.povm.num_outcomes();
  const size_t len = seq.size();

  LinearizedSetting out;
  out.sequence = seq;
  out.expansion_point = pack(mean, packing);
  out.a_bar = Matrix::Zero(m, packing.total());

  // Forward pass: inputs[k] is G_{g_k} applied to the state before position k.
  std::vector<Vector> inputs(len);
  Vector state = mean.prep_noise.entries() * mean.rho0.coefficients();
  for (size_t k = 0; k < len; ++k) {
    const auto& gate = mean.gates[seq.gates[k]];
    inputs[k] = gate.ideal.entries() * state;
    state = gate.noise.entries() * inputs[k];
  }
  const Matrix& effects = mean.povm.effects();
  out.m_bar = effects * (mean.meas_noise.entries() * state);

  // d m / d Lambda[a, b] = left[:, a] * right[b] for rows a >= 1.
  auto accumulate = [&](const ChannelSlice& slice, const Matrix& left,
                        const Vector& right) {
    for (int i = 0; i < m; ++i) {
      for (int a = 1; a < n2; ++a) {
        const double l = left(i, a);
        if (l == 0.0) continue;
        out.a_bar.row(i).segment(slice.offset + (a - 1) * n2, n2) += l * right.transpose();
      }
    }
  };

  if (const auto* meas = packing.meas_channel()) accumulate(*meas, effects, state);

  // Backward pass: left holds E Lambda_E prod_{j > k} (Lambda_j G_j).
  Matrix left = effects * mean.meas_noise.entries();
  for (size_t k = len; k-- > 0;) {
    const int g = seq.gates[k];
    accumulate(packing.gate_channel(g), left, inputs[k]);
    left = left * mean.gates[g].noise.entries() * mean.gates[g].ideal.entries();
  }
  if (const auto* prep = packing.prep_channel()) {
    accumulate(*prep, left, mean.rho0.coefficients());
  }
  return out;
}

Vector approximation_error(const Vector& lambda_sample, const LinearizedSetting& setting,
                           const GateSet& like, const ParameterPacking& packing) {
  const Vector exact = exact_forward(lambda_sample, setting.sequence, like, packing);
  return exact - (setting.m_bar +
                  setting.a_bar * (lambda_sample - setting.expansion_point));
}

PauliTransferMatrix linear_process_tomography(
    std::span<const ProcessTomographySetting> settings, int n_qubits) {
  const int n2 = 1 << (2 * n_qubits);
  if (settings.empty()) throw ValidationError("no tomography settings");
  Matrix a(static_cast<Eigen::Index>(settings.size()), n2 * n2);
  Vector m(static_cast<Eigen::Index>(settings.size()));
  for (size_t k = 0; k < settings.size(); ++k) {
    const auto& s = settings[k];
    if (s.effect.size() != n2 || s.input.coefficients().size() != n2) {
      throw ValidationError("tomography setting has wrong dimension");
    }
    for (int i = 0; i < n2; ++i) {
      a.row(static_cast<Eigen::Index>(k)).segment(i * n2, n2) =
          s.effect(i) * s.input.coefficients().transpose();
    }
    m(static_cast<Eigen::Index>(k)) = s.value;
  }
  const Vector vec = a.completeOrthogonalDecomposition().solve(m);
  Matrix out(n2, n2);
  for (int i = 0; i < n2; ++i) out.row(i) = vec.segment(i * n2, n2).transpose();
  return PauliTransferMatrix(n_qubits, std::move(out));
}

}  // namespace fbt
