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
#include "fbt/ptm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "fbt/error.hpp"

namespace fbt {
namespace {

constexpr std::array<char, 4> kPauliChars = {'I', 'X', 'Y', 'Z'};

CMatrix single_qubit_pauli(int k) {
  CMatrix p(2, 2);
  const Complex i(0.0, 1.0);
  switch (k) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, -i, i, 0; break;
    default: p << 1, 0, 0, -1; break;
  }
  return p;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

// Unnormalised Pauli string matrix for a label like "XZ".
CMatrix pauli_string(const std::string& label) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (char ch : label) {
    const auto* it = std::find(kPauliChars.begin(), kPauliChars.end(), ch);
    if (it == kPauliChars.end()) {
      throw ValidationError("invalid Pauli label '" + label + "'");
    }
    out = kron(out, single_qubit_pauli(static_cast<int>(it - kPauliChars.begin())));
  }
  return out;
}

int qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || n == 0) {
    throw ValidationError("dimension " + std::to_string(dim) +
                          " is not a power of two");
  }
  return n;
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

void require_psd(const CMatrix& rho, const char* what) {
  const double min_eig = hermitian_eigenvalues(rho).minCoeff();
  if (min_eig < -kPsdTol) {
    throw ValidationError(std::string(what) +
                          " is not positive semidefinite (min eigenvalue " +
                          std::to_string(min_eig) + ")");
  }
}

CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd w = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * w.asDiagonal() *
         solver.eigenvectors().adjoint();
}

}  // namespace

// --- PauliBasis --------------------------------------------------------------

PauliBasis::PauliBasis(int n_qubits) : n_qubits_(n_qubits), dim_(1 << n_qubits) {
  const int count = dim_ * dim_;
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim_));
  elements_.reserve(count);
  labels_.reserve(count);
  columns_.assign(static_cast<size_t>(count) * dim_, 0);
  values_.assign(static_cast<size_t>(count) * dim_, Complex(0.0));
  for (int idx = 0; idx < count; ++idx) {
    std::string label(n_qubits, 'I');
    int rest = idx;
    for (int q = n_qubits - 1; q >= 0; --q) {
      label[q] = kPauliChars[rest % 4];
      rest /= 4;
    }
    CMatrix p = norm * pauli_string(label);
    for (int r = 0; r < dim_; ++r) {
      for (int c = 0; c < dim_; ++c) {
        if (std::abs(p(r, c)) > 0.0) {
          columns_[idx * dim_ + r] = c;
          values_[idx * dim_ + r] = p(r, c);
        }
      }
    }
    elements_.push_back(std::move(p));
    labels_.push_back(std::move(label));
  }
}

const PauliBasis& PauliBasis::get(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 4) {
    throw ValidationError("PauliBasis supports 1 to 4 qubits, got " +
                          std::to_string(n_qubits));
  }
  static std::array<std::unique_ptr<PauliBasis>, 5> cache;
  static std::array<std::once_flag, 5> flags;
  std::call_once(flags[n_qubits], [n_qubits] {
    cache[n_qubits].reset(new PauliBasis(n_qubits));
  });
  return *cache[n_qubits];
}

int PauliBasis::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw ValidationError("unknown Pauli label '" + label + "'");
  }
  return static_cast<int>(it - labels_.begin());
}

CVector PauliBasis::coefficients(const CMatrix& op) const {
  CVector out(size());
  for (int i = 0; i < size(); ++i) {
    Complex acc(0.0);
    for (int r = 0; r < dim_; ++r) {
      acc += values_[i * dim_ + r] * op(columns_[i * dim_ + r], r);
    }
    out(i) = acc;
  }
  return out;
}

CMatrix PauliBasis::operator_from(const CVector& coefficients) const {
  CMatrix out = CMatrix::Zero(dim_, dim_);
  for (int i = 0; i < size(); ++i) {
    if (coefficients(i) == Complex(0.0)) continue;
    for (int r = 0; r < dim_; ++r) {
      out(r, columns_[i * dim_ + r]) += coefficients(i) * values_[i * dim_ + r];
    }
  }
  return out;
}

// --- PauliTransferMatrix -----------------------------------------------------

PauliTransferMatrix::PauliTransferMatrix(int n_qubits, Matrix entries)
    : n_qubits_(n_qubits), entries_(std::move(entries)) {
  const Eigen::Index expected = Eigen::Index{1} << (2 * n_qubits);
  if (n_qubits < 1 || entries_.rows() != expected || entries_.cols() != expected) {
    throw ValidationError("PTM for " + std::to_string(n_qubits) +
                          " qubit(s) must be " + std::to_string(expected) +
                          "x" + std::to_string(expected));
  }
}

PauliTransferMatrix PauliTransferMatrix::identity(int n_qubits) {
  const int n = 1 << (2 * n_qubits);
  return PauliTransferMatrix(n_qubits, Matrix::Identity(n, n));
}

PauliTransferMatrix PauliTransferMatrix::operator*(
    const PauliTransferMatrix& other) const {
  if (other.n_qubits_ != n_qubits_) {
    throw ValidationError("composing PTMs of different qubit counts");
  }
  return PauliTransferMatrix(n_qubits_, entries_ * other.entries_);
}

bool PauliTransferMatrix::is_trace_preserving(double tol) const {
  if (std::abs(entries_(0, 0) - 1.0) > tol) return false;
  return entries_.row(0).tail(size() - 1).cwiseAbs().maxCoeff() <= tol;
}

// --- DensityState ------------------------------------------------------------

DensityState::DensityState(int n_qubits, Vector coefficients)
    : n_qubits_(n_qubits), coefficients_(std::move(coefficients)) {
  const Eigen::Index expected = Eigen::Index{1} << (2 * n_qubits);
  if (coefficients_.size() != expected) {
    throw ValidationError("state coefficient vector has wrong length");
  }
  const double expected_c0 = 1.0 / std::sqrt(static_cast<double>(dim()));
  if (std::abs(coefficients_(0) - expected_c0) > kAlgebraTol) {
    throw ValidationError("density state does not have unit trace");
  }
}

DensityState DensityState::from_matrix(const CMatrix& rho) {
  if (rho.rows() != rho.cols()) throw ValidationError("density matrix not square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kAlgebraTol) {
    throw ValidationError("density matrix is not Hermitian");
  }
  const int n = qubits_for_dim(rho.rows());
  const CVector c = PauliBasis::get(n).coefficients(rho);
  return DensityState(n, c.real());
}

DensityState DensityState::from_ket(const CVector& ket) {
  const double norm = ket.norm();
  if (std::abs(norm - 1.0) > kAlgebraTol) throw ValidationError("ket is not normalised");
  return from_matrix(ket * ket.adjoint());
}

DensityState DensityState::basis(int n_qubits, int index) {
  const int d = 1 << n_qubits;
  if (index < 0 || index >= d) throw ValidationError("basis index out of range");
  CVector ket = CVector::Zero(d);
  ket(index) = 1.0;
  return from_ket(ket);
}

DensityState DensityState::maximally_mixed(int n_qubits) {
  const int d = 1 << n_qubits;
  Vector c = Vector::Zero(d * d);
  c(0) = 1.0 / std::sqrt(static_cast<double>(d));
  return DensityState(n_qubits, std::move(c));
}

CMatrix DensityState::matrix() const {
  return PauliBasis::get(n_qubits_).operator_from(coefficients_.cast<Complex>());
}

// --- Povm --------------------------------------------------------------------

Povm::Povm(int n_qubits, std::vector<std::string> labels, Matrix effects)
    : n_qubits_(n_qubits), labels_(std::move(labels)), effects_(std::move(effects)) {
  const int d = 1 << n_qubits;
  if (effects_.cols() != d * d) throw ValidationError("POVM effects have wrong width");
  if (static_cast<Eigen::Index>(labels_.size()) != effects_.rows()) {
    throw ValidationError("POVM label count does not match effect count");
  }
  Vector identity = Vector::Zero(d * d);
  identity(0) = std::sqrt(static_cast<double>(d));
  if ((effects_.colwise().sum().transpose() - identity).cwiseAbs().maxCoeff() >
      kAlgebraTol) {
    throw ValidationError("POVM effects do not sum to the identity");
  }
  const auto& basis = PauliBasis::get(n_qubits);
  for (Eigen::Index k = 0; k < effects_.rows(); ++k) {
    const CVector c = effects_.row(k).transpose().cast<Complex>();
    require_psd(basis.operator_from(c), "POVM effect");
  }
}

Povm Povm::computational(int n_qubits) {
  const int d = 1 << n_qubits;
  Matrix effects(d, d * d);
  std::vector<std::string> labels;
  for (int k = 0; k < d; ++k) {
    effects.row(k) = DensityState::basis(n_qubits, k).coefficients().transpose();
    std::string label;
    for (int q = n_qubits - 1; q >= 0; --q) label += ((k >> q) & 1) ? '1' : '0';
    labels.push_back(label);
  }
  return Povm(n_qubits, std::move(labels), std::move(effects));
}

// --- Conversions -------------------------------------------------------------

PauliTransferMatrix unitary_to_ptm(const CMatrix& unitary) {
  if (unitary.rows() != unitary.cols()) throw ValidationError("unitary not square");
  const Eigen::Index d = unitary.rows();
  if ((unitary * unitary.adjoint() - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() >
      kAlgebraTol) {
    throw ValidationError("matrix is not unitary to 1e-10");
  }
  const CMatrix u = unitary;
  return kraus_to_ptm(std::span<const CMatrix>(&u, 1));
}

PauliTransferMatrix kraus_to_ptm(std::span<const CMatrix> kraus) {
  if (kraus.empty()) throw ValidationError("empty Kraus set");
  const int n = qubits_for_dim(kraus.front().rows());
  const auto& basis = PauliBasis::get(n);
  Matrix out(basis.size(), basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    CMatrix image = CMatrix::Zero(basis.dim(), basis.dim());
    for (const auto& k : kraus) {
      if (k.rows() != basis.dim() || k.cols() != basis.dim()) {
        throw ValidationError("Kraus operators have inconsistent shapes");
      }
      image += k * basis.element(j) * k.adjoint();
    }
    out.col(j) = basis.coefficients(image).real();
  }
  return PauliTransferMatrix(n, std::move(out));
}

CMatrix ptm_to_choi(const PauliTransferMatrix& ptm) {
  const auto& basis = PauliBasis::get(ptm.n_qubits());
  const int d = basis.dim();
  const int n2 = basis.size();
  const double scale = 1.0 / d;
  CMatrix choi = CMatrix::Zero(n2, n2);
  // J = (1/d) sum_ij Lambda_ij P_j^T (x) P_i; Paulis are monomial involutions.
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n2; ++i) {
      const double lam = ptm(i, j);
      if (lam == 0.0) continue;
      for (int r1 = 0; r1 < d; ++r1) {
        const int c1 = basis.column(j, r1);
        const Complex vj = basis.value(j, c1);
        for (int r2 = 0; r2 < d; ++r2) {
          choi(r1 * d + r2, c1 * d + basis.column(i, r2)) +=
              scale * lam * vj * basis.value(i, r2);
        }
      }
    }
  }
  return choi;
}

PauliTransferMatrix choi_to_ptm(const CMatrix& choi, int n_qubits) {
  const auto& basis = PauliBasis::get(n_qubits);
  const int d = basis.dim();
  const int n2 = basis.size();
  if (choi.rows() != n2 || choi.cols() != n2) {
    throw ValidationError("Choi matrix has wrong shape");
  }
  Matrix out(n2, n2);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n2; ++i) {
      Complex acc(0.0);
      for (int r1 = 0; r1 < d; ++r1) {
        const int c1 = basis.column(j, r1);
        const Complex vj = basis.value(j, c1);
        for (int r2 = 0; r2 < d; ++r2) {
          acc += std::conj(vj * basis.value(i, r2)) *
                 choi(r1 * d + r2, c1 * d + basis.column(i, r2));
        }
      }
      out(i, j) = d * acc.real();
    }
  }
  return PauliTransferMatrix(n_qubits, std::move(out));
}

double min_choi_eigenvalue(const PauliTransferMatrix& ptm) {
  return hermitian_eigenvalues(ptm_to_choi(ptm)).minCoeff();
}

double frobenius_distance(const PauliTransferMatrix& a,
                          const PauliTransferMatrix& b) {
  return (a.entries() - b.entries()).norm();
}

// --- Metrics -----------------------------------------------------------------

const char* to_string(FidelityConvention convention) {
  return convention == FidelityConvention::kAverage ? "average"
                                                    : "normalized_trace";
}

GateFidelity gate_fidelity(const PauliTransferMatrix& noise) {
  const double d = noise.dim();
  const double tr = noise.entries().trace();
  return GateFidelity{(tr + d) / (d * d + d), (tr - 1.0) / (d * d)};
}

double average_gate_fidelity(const PauliTransferMatrix& noise) {
  return gate_fidelity(noise).average;
}

double fidelity(const PauliTransferMatrix& noise, FidelityConvention c) {
  return gate_fidelity(noise).get(c);
}

double trace_for_fidelity(double f, int dim, FidelityConvention c) {
  const double d = dim;
  return c == FidelityConvention::kAverage ? f * (d * d + d) - d
                                           : f * d * d + 1.0;
}

Coherence unitarity_and_incoherence(const PauliTransferMatrix& noise) {
  const int n = noise.size();
  const double d = noise.dim();
  const auto block = noise.entries().bottomRightCorner(n - 1, n - 1);
  const double u = block.squaredNorm() / (n - 1);
  return Coherence{u, (d - 1.0) / d * (1.0 - std::sqrt(u))};
}

double state_fidelity(const DensityState& rho, const DensityState& target) {
  if (rho.n_qubits() != target.n_qubits()) {
    throw ValidationError("state fidelity between different qubit counts");
  }
  const CMatrix r = rho.matrix();
  const CMatrix t = target.matrix();
  require_psd(r, "state");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (t + t.adjoint()));
  const Eigen::VectorXd w = solver.eigenvalues();
  if (w.minCoeff() < -kPsdTol) throw ValidationError("target state is not PSD");
  if (w(w.size() - 1) > 1.0 - kAlgebraTol) {
    const CVector psi = solver.eigenvectors().col(w.size() - 1);
    return std::clamp((psi.adjoint() * r * psi)(0).real(), 0.0, 1.0);
  }
  const CMatrix s = psd_sqrt(r);
  const Eigen::VectorXd ev = hermitian_eigenvalues(s * t * s).cwiseMax(0.0);
  const double root = ev.cwiseSqrt().sum();
  return std::clamp(root * root, 0.0, 1.0);
}

double concurrence(const DensityState& rho) {
  if (rho.n_qubits() != 2) throw ValidationError("concurrence needs a two-qubit state");
  const CMatrix r = rho.matrix();
  require_psd(r, "state");
  const CMatrix yy = pauli_string("YY");
  const CMatrix flipped = yy * r.conjugate() * yy;
  const CMatrix s = psd_sqrt(r);
  Eigen::VectorXd ev = hermitian_eigenvalues(s * flipped * s).cwiseMax(0.0).cwiseSqrt();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  return std::clamp(ev(0) - ev(1) - ev(2) - ev(3), 0.0, 1.0);
}

StateMetrics state_fidelity_and_concurrence(const DensityState& rho,
                                            const DensityState& target) {
  return StateMetrics{state_fidelity(rho, target), concurrence(rho)};
}

CMatrix pauli_rotation(const std::string& label, double theta) {
  const CMatrix p = pauli_string(label);
  const Eigen::Index d = p.rows();
  return std::cos(theta / 2) * CMatrix::Identity(d, d) -
         Complex(0.0, std::sin(theta / 2)) * p;
}

}  // namespace fbt
