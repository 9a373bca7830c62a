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
#include "fbt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbt/error.hpp"

namespace fbt {

namespace {

PauliTransferMatrix amplitude_damping_ptm(int n_qubits, int qubit, double gamma) {
  CMatrix k0 = CMatrix::Zero(2, 2), k1 = CMatrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);  // |1> decays to |0>
  std::vector<CMatrix> kraus;
  for (const CMatrix* k : {&k0, &k1}) {
    CMatrix full = CMatrix::Identity(1, 1);
    for (int q = 0; q < n_qubits; ++q) {
      const CMatrix f = q == qubit ? *k : CMatrix::Identity(2, 2);
      CMatrix next(full.rows() * 2, full.cols() * 2);
      for (int a = 0; a < full.rows(); ++a)
        for (int b = 0; b < full.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = full(a, b) * f;
      full = std::move(next);
    }
    kraus.push_back(full);
  }
  return kraus_to_ptm(kraus);
}

}  // namespace

PauliTransferMatrix make_noise_model(const NoiseSpec& spec, int n_qubits) {
  if (n_qubits < 1 || n_qubits > 4) throw ValidationError("n_qubits must be in [1, 4]");
  const int d = 1 << n_qubits;
  const int n2 = d * d;
  switch (spec.kind) {
    case NoiseKind::kIdentity:
      return PauliTransferMatrix::identity(n_qubits);
    case NoiseKind::kDepolarizing: {
      // Lambda(rho) = (1 - p) rho + p I/d; CPTP for p in [0, d^2/(d^2 - 1)].
      if (!(spec.p >= 0.0) || spec.p > double(n2) / (n2 - 1)) {
        throw ValidationError("depolarizing p out of range");
      }
      Matrix m = Matrix::Identity(n2, n2) * (1.0 - spec.p);
      m(0, 0) = 1.0;
      return PauliTransferMatrix(n_qubits, std::move(m));
    }
    case NoiseKind::kCoherentOverrotation: {
      if (static_cast<int>(spec.axis.size()) != n_qubits ||
          spec.axis.find_first_not_of("IXYZ") != std::string::npos) {
        throw ValidationError("rotation axis must be a Pauli label of length " +
                              std::to_string(n_qubits));
      }
      if (!std::isfinite(spec.theta)) throw ValidationError("theta must be finite");
      return unitary_to_ptm(pauli_rotation(spec.axis, spec.theta));
    }
    case NoiseKind::kAmplitudeDamping: {
      if (!(spec.gamma >= 0.0 && spec.gamma <= 1.0)) {
        throw ValidationError("gamma must lie in [0, 1]");
      }
      if (spec.qubit >= n_qubits || spec.qubit < -1) throw ValidationError("bad qubit index");
      if (spec.qubit >= 0) return amplitude_damping_ptm(n_qubits, spec.qubit, spec.gamma);
      PauliTransferMatrix out = PauliTransferMatrix::identity(n_qubits);
      for (int q = 0; q < n_qubits; ++q) out = amplitude_damping_ptm(n_qubits, q, spec.gamma) * out;
      return out;
    }
    case NoiseKind::kAssignment: {
      const Matrix& q = spec.confusion;
      if (q.rows() != d || q.cols() != d) {
        throw ValidationError("confusion matrix must be " + std::to_string(d) + "x" +
                              std::to_string(d));
      }
      if ((q.array() < 0).any() ||
          (q.colwise().sum().array() - 1.0).abs().maxCoeff() > 1e-10) {
        throw ValidationError("confusion matrix columns must be distributions");
      }
      std::vector<CMatrix> kraus;
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (q(i, j) == 0.0) continue;
          CMatrix k = CMatrix::Zero(d, d);
          k(i, j) = std::sqrt(q(i, j));
          kraus.push_back(std::move(k));
        }
      }
      return kraus_to_ptm(kraus);
    }
    case NoiseKind::kComposite: {
      PauliTransferMatrix out = PauliTransferMatrix::identity(n_qubits);
      for (const NoiseSpec& c : spec.components) out = make_noise_model(c, n_qubits) * out;
      return out;
    }
  }
  throw ValidationError("unknown noise kind");
}

uint64_t sequence_hash(const Sequence& seq) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (int g : seq.gates) {
    h ^= static_cast<uint64_t>(g) + 1;
    h *= 0x100000001b3ULL;
  }
  h ^= seq.gates.size();
  h *= 0x100000001b3ULL;
  return h;
}

std::vector<int64_t> sample_multinomial(const Vector& p, int64_t shots, Rng& rng) {
  std::vector<int64_t> counts(p.size(), 0);
  int64_t left = shots;
  double mass = 1.0;
  for (Eigen::Index i = 0; i + 1 < p.size() && left > 0; ++i) {
    const double q = mass > 0 ? std::clamp(p(i) / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<int64_t> bin(left, q);
    counts[i] = bin(rng);
    left -= counts[i];
    mass -= p(i);
  }
  counts.back() += left;
  return counts;
}

TrueDevice::TrueDevice(GateSet truth, uint64_t seed, int64_t default_shots)
    : truth_(std::move(truth)), seed_(seed), default_shots_(default_shots) {
  if (default_shots_ < 1) throw ValidationError("shots must be >= 1");
  auto check = [](const PauliTransferMatrix& ch, const std::string& name) {
    if (!ch.is_trace_preserving(1e-10) || min_choi_eigenvalue(ch) < -1e-9) {
      throw ValidationError("truth channel '" + name + "' is not CPTP");
    }
  };
  for (const NoisyGate& g : truth_.gates) check(g.noise, g.name);
  check(truth_.meas_noise, "meas");
  check(truth_.prep_noise, "prep");
}

Vector TrueDevice::probabilities(const Sequence& seq) const {
  Vector p = exact_forward(truth_, seq);
  if (p.minCoeff() < -1e-12) {
    throw NumericalError("negative Born probability " + std::to_string(p.minCoeff()));
  }
  p = p.cwiseMax(0.0);
  return p / p.sum();
}

ExperimentRecord TrueDevice::measure(const Sequence& seq, int64_t shots, uint64_t stream,
                                     bool keep_true_probs) const {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  const Vector p = probabilities(seq);
  Rng rng(derive_seed(seed_ ^ sequence_hash(seq), stream));
  ExperimentRecord rec;
  rec.sequence = seq;
  rec.shots = shots;
  rec.counts = sample_multinomial(p, shots, rng);
  if (keep_true_probs) rec.true_probs = p;
  return rec;
}

std::vector<ExperimentRecord> TrueDevice::measure_all(const std::vector<Sequence>& seqs,
                                                      int64_t shots) const {
  std::vector<ExperimentRecord> out;
  out.reserve(seqs.size());
  for (size_t i = 0; i < seqs.size(); ++i) out.push_back(measure(seqs[i], shots, i));
  return out;
}

std::vector<Sequence> generate_tomography_settings(int max_length, int n_settings,
                                                   int num_gates, Rng& rng) {
  if (max_length < 0) throw ValidationError("max_length must be >= 0");
  if (n_settings < 0) throw ValidationError("n_settings must be >= 0");
  if (num_gates < 1) throw ValidationError("num_gates must be >= 1");
  std::uniform_int_distribution<int> pick(0, num_gates - 1);
  std::vector<Sequence> out(n_settings);
  for (int k = 0; k < n_settings; ++k) {
    const int len = k % (max_length + 1);
    out[k].gates.resize(len);
    for (int& g : out[k].gates) g = pick(rng);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace fbt
