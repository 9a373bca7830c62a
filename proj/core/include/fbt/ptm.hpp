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

// Channel and state algebra in the Pauli transfer matrix picture.
//
// Conventions used throughout the library:
//  * Paulis are ordered I, X, Y, Z per qubit with qubit 1 as the slowest
//    index, so the two-qubit label "XZ" sits at index 1 * 4 + 3 = 7.
//  * Paulis are normalised, Tr(P_i P_j) = delta_ij. Unitary channels are then
//    orthogonal matrices and a trace-preserving channel has top row e_0^T.
//  * Computational basis states are ordered with qubit 1 as the most
//    significant bit; |0> is "up" and |1> is "down".
//  * Choi matrices are normalised to unit trace for TP maps:
//      J = (1/d) sum_{a,b} |a><b| (x) Lambda(|a><b|).

#include <span>
#include <string>
#include <vector>

#include "fbt/types.hpp"

namespace fbt {

inline constexpr double kAlgebraTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;

// Ordered normalised n-qubit Pauli basis. Each element is stored both densely
// and as a monomial (one nonzero per row) for fast superoperator conversions.
class PauliBasis {
 public:
  // Cached, immutable basis for n_qubits in [1, 4].
  static const PauliBasis& get(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  int dim() const { return dim_; }
  int size() const { return dim_ * dim_; }
  const CMatrix& element(int i) const { return elements_[i]; }
  const std::string& label(int i) const { return labels_[i]; }
  int index_of(const std::string& label) const;

  // Monomial structure: element(i)(r, column(i, r)) == value(i, r).
  int column(int i, int r) const { return columns_[i * dim_ + r]; }
  Complex value(int i, int r) const { return values_[i * dim_ + r]; }

  // Pauli coefficients r_i = Tr(P_i A) of a d x d operator.
  CVector coefficients(const CMatrix& op) const;
  // Inverse of coefficients(): sum_i r_i P_i.
  CMatrix operator_from(const CVector& coefficients) const;

 private:
  explicit PauliBasis(int n_qubits);

  int n_qubits_;
  int dim_;
  std::vector<CMatrix> elements_;
  std::vector<std::string> labels_;
  std::vector<int> columns_;
  std::vector<Complex> values_;
};

// Real d^2 x d^2 superoperator, entry (i, j) = Tr(P_i Lambda(P_j)).
class PauliTransferMatrix {
 public:
  PauliTransferMatrix() = default;
  PauliTransferMatrix(int n_qubits, Matrix entries);

  static PauliTransferMatrix identity(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  int dim() const { return 1 << n_qubits_; }
  int size() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  Matrix& mutable_entries() { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  // Composition; (a * b) applies b first.
  PauliTransferMatrix operator*(const PauliTransferMatrix& other) const;

  bool is_trace_preserving(double tol = 1e-12) const;

 private:
  int n_qubits_ = 0;
  Matrix entries_;
};

using Ptm = PauliTransferMatrix;

// Density operator stored as its real Pauli coefficient vector.
class DensityState {
 public:
  DensityState() = default;
  DensityState(int n_qubits, Vector coefficients);

  static DensityState from_matrix(const CMatrix& rho);
  static DensityState from_ket(const CVector& ket);
  // Computational basis state |index>.
  static DensityState basis(int n_qubits, int index);
  static DensityState maximally_mixed(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  int dim() const { return 1 << n_qubits_; }
  const Vector& coefficients() const { return coefficients_; }
  CMatrix matrix() const;

 private:
  int n_qubits_ = 0;
  Vector coefficients_;
};

// POVM with effects stacked as M rows of Pauli coefficient vectors.
class Povm {
 public:
  Povm() = default;
  // Throws ValidationError unless the effects are PSD and sum to identity.
  Povm(int n_qubits, std::vector<std::string> labels, Matrix effects);

  // Projective measurement in the computational basis, outcome k = |k><k|.
  static Povm computational(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  int num_outcomes() const { return static_cast<int>(effects_.rows()); }
  const Matrix& effects() const { return effects_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  int n_qubits_ = 0;
  std::vector<std::string> labels_;
  Matrix effects_;
};

// --- Conversions -------------------------------------------------------------

// Entries Tr(P_i U P_j U^dagger). Throws ValidationError if U is not unitary
// to kAlgebraTol.
PauliTransferMatrix unitary_to_ptm(const CMatrix& unitary);

// sum_k K_k rho K_k^dagger.
PauliTransferMatrix kraus_to_ptm(std::span<const CMatrix> kraus);

// Unit-trace Choi matrix (for TP maps). The map is linear and satisfies
// ||choi(A) - choi(B)||_F = ||A - B||_F / d.
CMatrix ptm_to_choi(const PauliTransferMatrix& ptm);
// Inverse of ptm_to_choi; the anti-Hermitian part of the input is discarded.
PauliTransferMatrix choi_to_ptm(const CMatrix& choi, int n_qubits);

// Smallest eigenvalue of the Choi matrix; >= 0 iff the channel is CP.
double min_choi_eigenvalue(const PauliTransferMatrix& ptm);

double frobenius_distance(const PauliTransferMatrix& a,
                          const PauliTransferMatrix& b);

// --- Metrics -----------------------------------------------------------------

enum class FidelityConvention {
  // (Tr Lambda + d) / (d^2 + d); equals 1 for the identity channel.
  kAverage,
  // (Tr Lambda - 1) / d^2, the normalised-trace form. Equals (d^2 - 1) / d^2
  // for the identity channel.
  kNormalizedTrace,
};

const char* to_string(FidelityConvention convention);

struct GateFidelity {
  double average = 0.0;
  double normalized_trace = 0.0;
  double get(FidelityConvention c) const {
    return c == FidelityConvention::kAverage ? average : normalized_trace;
  }
};

// Fidelity of a noise channel (ideal gate already factored out).
GateFidelity gate_fidelity(const PauliTransferMatrix& noise);
double average_gate_fidelity(const PauliTransferMatrix& noise);
double fidelity(const PauliTransferMatrix& noise, FidelityConvention c);

// Inverts fidelity(): the PTM trace a channel must have for fidelity f.
double trace_for_fidelity(double f, int dim, FidelityConvention c);

struct Coherence {
  double unitarity = 0.0;
  double incoherence = 0.0;
};

// u = Tr(M^T M) / (d^2 - 1) with M the lower-right unital block;
// incoherence = (d - 1)/d * (1 - sqrt(u)).
Coherence unitarity_and_incoherence(const PauliTransferMatrix& noise);

struct StateMetrics {
  double fidelity = 0.0;
  double concurrence = 0.0;
};

// Uhlmann fidelity (pure-target shortcut when the target has rank one).
// Throws ValidationError if either state has an eigenvalue below -kPsdTol.
double state_fidelity(const DensityState& rho, const DensityState& target);
// Wootters concurrence of a two-qubit state.
double concurrence(const DensityState& rho);
StateMetrics state_fidelity_and_concurrence(const DensityState& rho,
                                            const DensityState& target);

// Matrix exponential exp(-i theta/2 P) for a Pauli label such as "XI".
CMatrix pauli_rotation(const std::string& label, double theta);

}  // namespace fbt
