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
#include "fbt/clifford.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "fbt/error.hpp"

namespace fbt {

Clifford Clifford::identity(int n_qubits) {
  Clifford c;
  c.n_qubits_ = n_qubits;
  const int n2 = 1 << (2 * n_qubits);
  c.image_.resize(n2);
  c.sign_.assign(n2, 1);
  for (int i = 0; i < n2; ++i) c.image_[i] = i;
  return c;
}

Clifford Clifford::from_ptm(const PauliTransferMatrix& ptm, double tol) {
  Clifford c = identity(ptm.n_qubits());
  const int n2 = ptm.size();
  std::vector<bool> used(n2, false);
  for (int j = 0; j < n2; ++j) {
    Eigen::Index row = 0;
    const double v = ptm.entries().col(j).cwiseAbs().maxCoeff(&row);
    if (std::abs(v - 1.0) > tol ||
        std::abs(ptm.entries().col(j).squaredNorm() - 1.0) > tol || used[row]) {
      throw ValidationError("PTM is not a signed Pauli permutation");
    }
    used[row] = true;
    c.image_[j] = static_cast<int>(row);
    c.sign_[j] = ptm(row, j) > 0 ? 1 : -1;
  }
  return c;
}

Clifford Clifford::from_unitary(const CMatrix& unitary) {
  return from_ptm(unitary_to_ptm(unitary));
}

Clifford Clifford::operator*(const Clifford& other) const {
  if (n_qubits_ != other.n_qubits_) throw ValidationError("Clifford size mismatch");
  Clifford c = *this;
  for (size_t i = 0; i < image_.size(); ++i) {
    const int mid = other.image_[i];
    c.image_[i] = image_[mid];
    c.sign_[i] = other.sign_[i] * sign_[mid];
  }
  return c;
}

PauliTransferMatrix Clifford::ptm() const {
  const int n2 = static_cast<int>(image_.size());
  Matrix m = Matrix::Zero(n2, n2);
  for (int j = 0; j < n2; ++j) m(image_[j], j) = sign_[j];
  return PauliTransferMatrix(n_qubits_, std::move(m));
}

CMatrix Clifford::unitary() const {
  // For U P U^dagger = Q over a full orthonormal Pauli set,
  // sum_k Q_k A P_k = Tr(U^dagger A) U for any A.
  const auto& basis = PauliBasis::get(n_qubits_);
  const int d = basis.dim();
  for (int a = 0; a < d * d; ++a) {
    CMatrix probe = CMatrix::Zero(d, d);
    probe(a / d, a % d) = 1.0;
    CMatrix acc = CMatrix::Zero(d, d);
    for (int k = 0; k < basis.size(); ++k) {
      acc += static_cast<double>(sign_[k]) * basis.element(image_[k]) * probe *
             basis.element(k);
    }
    // acc = Tr(U^dagger probe) U; the normalised Paulis contribute 1/d.
    const double norm = acc.norm();
    if (norm > 1e-6) return acc * (std::sqrt(static_cast<double>(d)) / norm);
  }
  throw NumericalError("could not rebuild a Clifford unitary");
}

uint64_t Clifford::key() const {
  const auto& basis = PauliBasis::get(n_qubits_);
  uint64_t key = 0;
  for (int q = 0; q < n_qubits_; ++q) {
    for (char p : {'X', 'Z'}) {
      std::string label(n_qubits_, 'I');
      label[q] = p;
      const int i = basis.index_of(label);
      key = (key << 8) | static_cast<uint64_t>(image_[i] * 2 + (sign_[i] < 0 ? 1 : 0));
    }
  }
  return key;
}

namespace {

struct Move {
  std::vector<int> primitives;
  bool entangling;
};

}  // namespace

CMatrix word_unitary(const Sequence& word, const GateSet& gateset) {
  const int d = 1 << gateset.n_qubits;
  CMatrix u = CMatrix::Identity(d, d);
  for (int g : word.gates) {
    if (g < 0 || g >= gateset.num_gates()) throw ValidationError("gate index out of range");
    const CMatrix& gu = gateset.gates[g].unitary;
    if (gu.rows() != d) {
      throw ValidationError("no ideal unitary for gate '" + gateset.gates[g].name + "'");
    }
    u = gu * u;
  }
  return u;
}

double phase_invariant_overlap(const CMatrix& u, const CMatrix& v) {
  return std::abs((u.adjoint() * v).trace()) / static_cast<double>(u.rows());
}

CliffordGroup::CliffordGroup() {
  const GateSet gs = native_two_qubit_gate_set();
  const int u1d = gs.gate_index("U1_dn"), u1u = gs.gate_index("U1_up");
  const int u2d = gs.gate_index("U2_dn"), u2u = gs.gate_index("U2_up");
  const int z1 = gs.gate_index("Z1"), z2 = gs.gate_index("Z2");
  const std::vector<Move> moves = {
      {{u1d, u1u}, false}, {{u2d, u2u}, false}, {{z1}, false},      {{z2}, false},
      {{u1d, u1d}, true},  {{u1u, u1u}, true},  {{u2d, u2d}, true}, {{u2u, u2u}, true},
  };
  std::vector<Clifford> move_cliffords;
  for (const Move& m : moves) {
    move_cliffords.push_back(Clifford::from_unitary(word_unitary(Sequence{m.primitives}, gs)));
  }

  // Dijkstra on word length with a bucket queue; FIFO within a bucket keeps
  // the result deterministic.
  std::vector<std::deque<int>> buckets(1);
  elements_.push_back(Clifford::identity(2));
  words_.push_back(Sequence{});
  index_[elements_[0].key()] = 0;
  buckets[0].push_back(0);
  std::vector<bool> done(1, false);
  for (size_t cost = 0; cost < buckets.size(); ++cost) {
    while (!buckets[cost].empty()) {
      const int cur = buckets[cost].front();
      buckets[cost].pop_front();
      if (done[cur]) continue;
      done[cur] = true;
      for (size_t k = 0; k < moves.size(); ++k) {
        Clifford next = move_cliffords[k] * elements_[cur];
        const size_t c = cost + moves[k].primitives.size();
        auto it = index_.find(next.key());
        if (it != index_.end()) continue;  // first reach is shortest (costs >= 1)
        const int id = static_cast<int>(elements_.size());
        index_[next.key()] = id;
        elements_.push_back(std::move(next));
        Sequence w = words_[cur];
        w.gates.insert(w.gates.end(), moves[k].primitives.begin(), moves[k].primitives.end());
        words_.push_back(std::move(w));
        done.push_back(false);
        if (buckets.size() <= c) buckets.resize(c + 1);
        buckets[c].push_back(id);
      }
    }
  }

  // 0-1 BFS on the number of entangling moves.
  classes_.assign(elements_.size(), -1);
  std::deque<int> queue{0};
  std::vector<int> dist(elements_.size(), 1 << 20);
  dist[0] = 0;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (size_t k = 0; k < moves.size(); ++k) {
      const int id = index_.at((move_cliffords[k] * elements_[cur]).key());
      const int w = moves[k].entangling ? 1 : 0;
      if (dist[cur] + w < dist[id]) {
        dist[id] = dist[cur] + w;
        if (w == 0) queue.push_front(id);
        else queue.push_back(id);
      }
    }
  }
  classes_ = dist;

  double total = 0.0;
  for (const Sequence& w : words_) total += static_cast<double>(w.size());
  mean_word_length_ = total / static_cast<double>(words_.size());
}

const CliffordGroup& CliffordGroup::two_qubit() {
  static const CliffordGroup group;
  return group;
}

int CliffordGroup::index_of(const Clifford& c) const {
  if (c.n_qubits() != 2) return -1;
  auto it = index_.find(c.key());
  return it == index_.end() ? -1 : it->second;
}

CompiledClifford compile_clifford(const Clifford& c) {
  const CliffordGroup& group = CliffordGroup::two_qubit();
  const int id = group.index_of(c);
  if (id < 0) throw ValidationError("not a two-qubit Clifford element");
  return CompiledClifford{c.unitary(), group.word(id)};
}

}  // namespace fbt
