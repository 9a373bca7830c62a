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

// Clifford elements as signed permutations of the Pauli basis (the
// stabilizer tableau extended to all d^2 Paulis), and the enumerated
// two-qubit Clifford group compiled onto the native gate set.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fbt/forward_model.hpp"
#include "fbt/gateset.hpp"
#include "fbt/ptm.hpp"

namespace fbt {

class Clifford {
 public:
  Clifford() = default;
  static Clifford identity(int n_qubits);
  // Throws ValidationError unless the PTM is a signed permutation to tol.
  static Clifford from_ptm(const PauliTransferMatrix& ptm, double tol = 1e-8);
  static Clifford from_unitary(const CMatrix& unitary);

  int n_qubits() const { return n_qubits_; }
  // C P_i C^dagger = sign(i) P_image(i)
  int image(int i) const { return image_[i]; }
  int sign(int i) const { return sign_[i]; }

  // (a * b) applies b first.
  Clifford operator*(const Clifford& other) const;
  bool operator==(const Clifford& other) const {
    return image_ == other.image_ && sign_ == other.sign_;
  }

  PauliTransferMatrix ptm() const;
  // A unitary with this Pauli action, rebuilt from the images alone
  // (unique up to global phase).
  CMatrix unitary() const;
  // Packs the images of the X and Z generators of each qubit.
  uint64_t key() const;

 private:
  int n_qubits_ = 0;
  std::vector<int> image_;
  std::vector<int> sign_;
};

// All 11520 two-qubit Cliffords (modulo phase) with the shortest primitive
// word over the native gate set. Moves used in the search: X90 on one qubit
// (U_q,dn U_q,up), the virtual Z90 gates, and CROT_pi (a repeated U_q,c).
class CliffordGroup {
 public:
  static const CliffordGroup& two_qubit();

  int size() const { return static_cast<int>(elements_.size()); }
  const Clifford& element(int i) const { return elements_[i]; }
  // Primitive gate indices into native_two_qubit_gate_set(), time order.
  const Sequence& word(int i) const { return words_[i]; }
  // Minimum number of CROT_pi moves needed: 0 local, 1 CNOT-like,
  // 2 iSWAP-like, 3 SWAP-like.
  int entangling_class(int i) const { return classes_[i]; }
  // -1 if not a member.
  int index_of(const Clifford& c) const;
  double mean_word_length() const { return mean_word_length_; }

 private:
  CliffordGroup();

  std::vector<Clifford> elements_;
  std::vector<Sequence> words_;
  std::vector<int> classes_;
  std::unordered_map<uint64_t, int> index_;
  double mean_word_length_ = 0.0;
};

struct CompiledClifford {
  CMatrix target_unitary;
  Sequence word;
};

// Throws ValidationError for elements outside the two-qubit group.
CompiledClifford compile_clifford(const Clifford& c);

// Ideal unitary of a native primitive word, time ordered.
CMatrix word_unitary(const Sequence& word, const GateSet& gateset);

// |Tr(U^dagger V)| / d, which is 1 iff U = V up to global phase.
double phase_invariant_overlap(const CMatrix& u, const CMatrix& v);

}  // namespace fbt
