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
#include "fbt/rb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "fbt/error.hpp"

namespace fbt {

namespace {

// Accept iff C|00><00|C^dagger = |00><00|: both Z generators map into the
// positive stabilizer group {+ZI, +IZ, +ZZ}.
bool fixes_ground_state(const Clifford& c) {
  const auto& basis = PauliBasis::get(2);
  static const int zi = basis.index_of("ZI"), iz = basis.index_of("IZ"),
                   zz = basis.index_of("ZZ");
  for (int g : {zi, iz}) {
    const int im = c.image(g);
    if (c.sign(g) < 0 || (im != zi && im != iz && im != zz)) return false;
  }
  return true;
}

}  // namespace

std::vector<RbSequence> sample_rb_sequences(int n_per_length, const std::vector<int>& lengths,
                                            Rng& rng) {
  if (n_per_length < 0) throw ValidationError("n_per_length must be >= 0");
  const CliffordGroup& group = CliffordGroup::two_qubit();
  std::uniform_int_distribution<int> pick(0, group.size() - 1);
  std::vector<RbSequence> out;
  for (int len : lengths) {
    if (len < 1) throw ValidationError("RB lengths must be >= 1");
    for (int s = 0; s < n_per_length; ++s) {
      RbSequence seq;
      seq.clifford_length = len;
      Clifford total = Clifford::identity(2);
      for (int k = 0; k + 1 < len; ++k) {
        const int id = pick(rng);
        seq.cliffords.push_back(id);
        total = group.element(id) * total;
      }
      int last = -1;
      while (true) {
        const int id = pick(rng);
        if (fixes_ground_state(group.element(id) * total)) {
          last = id;
          break;
        }
      }
      seq.cliffords.push_back(last);
      for (int id : seq.cliffords) {
        const auto& w = group.word(id).gates;
        seq.word.gates.insert(seq.word.gates.end(), w.begin(), w.end());
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

RbDataset simulate_rb_dataset(const TrueDevice& device,
                              const std::vector<RbSequence>& sequences, int64_t shots) {
  RbDataset ds;
  std::set<int> lens;
  for (size_t i = 0; i < sequences.size(); ++i) {
    ExperimentRecord rec = device.measure(sequences[i].word, shots, i);
    rec.clifford_length = sequences[i].clifford_length;
    lens.insert(sequences[i].clifford_length);
    ds.records.push_back(std::move(rec));
  }
  ds.lengths.assign(lens.begin(), lens.end());
  return ds;
}

RbFit fit_rb_decay(const std::vector<double>& lengths, const std::vector<double>& survival,
                   double mean_primitives, int dim) {
  if (lengths.size() != survival.size()) {
    throw ValidationError("lengths and survival differ in size");
  }
  if (std::set<double>(lengths.begin(), lengths.end()).size() < 3) {
    throw ValidationError("RB fit needs at least 3 distinct lengths");
  }
  if (!(mean_primitives > 0)) throw ValidationError("mean primitive count must be > 0");
  const Eigen::Index n = static_cast<Eigen::Index>(lengths.size());
  Vector l(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    l(i) = lengths[i];
    y(i) = survival[i];
  }

  // For fixed p the model is linear in (A, B); a grid over p seeds the
  // Levenberg-Marquardt refinement.
  auto linear_ab = [&](double p, double& a, double& b) {
    Matrix x(n, 2);
    x.col(0) = l.unaryExpr([p](double v) { return std::pow(p, v); });
    x.col(1).setOnes();
    const Vector ab = x.colPivHouseholderQr().solve(y);
    a = ab(0);
    b = ab(1);
    return (x * ab - y).squaredNorm();
  };
  double best = std::numeric_limits<double>::infinity();
  Vector theta(3);  // A, p, B
  for (int k = 1; k < 400; ++k) {
    const double p = 1.0 - std::pow(10.0, -4.0 + 4.0 * k / 400.0);
    double a, b;
    const double s = linear_ab(p, a, b);
    if (s < best) {
      best = s;
      theta << a, p, b;
    }
  }

  auto residual = [&](const Vector& t) {
    return Vector((t(0) * l.unaryExpr([&](double v) { return std::pow(t(1), v); }).array() +
                   t(2) - y.array()).matrix());
  };
  auto jacobian = [&](const Vector& t) {
    Matrix j(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      j(i, 0) = std::pow(t(1), l(i));
      j(i, 1) = l(i) == 0 ? 0.0 : t(0) * l(i) * std::pow(t(1), l(i) - 1);
      j(i, 2) = 1.0;
    }
    return j;
  };

  double mu = 1e-3;
  Vector r = residual(theta);
  double cost = r.squaredNorm();
  int it = 0;
  for (; it < 500; ++it) {
    const Matrix j = jacobian(theta);
    Matrix h = j.transpose() * j;
    const Vector g = j.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-15) break;
    Matrix damped = h;
    damped.diagonal() += mu * h.diagonal().cwiseMax(1e-12);
    const Vector step = damped.ldlt().solve(-g);
    Vector trial = theta + step;
    trial(1) = std::clamp(trial(1), 1e-9, 1.0 - 1e-12);
    const Vector rt = residual(trial);
    const double ct = rt.squaredNorm();
    if (ct < cost) {
      const double rel = (cost - ct) / std::max(cost, 1e-300);
      theta = trial;
      r = rt;
      cost = ct;
      mu = std::max(mu / 3.0, 1e-12);
      if (step.norm() < 1e-14 * (1.0 + theta.norm()) || rel < 1e-16) break;
    } else {
      mu *= 4.0;
      if (mu > 1e12) break;
    }
  }
  if (!theta.allFinite()) throw NumericalError("RB fit diverged");

  RbFit fit;
  fit.a = theta(0);
  fit.p = theta(1);
  fit.b = theta(2);
  fit.iterations = it;
  fit.residuals = r;
  const double dd = dim;
  fit.r_c = (dd - 1.0) / dd * (1.0 - fit.p);
  const Matrix j = jacobian(theta);
  const double dof = std::max<double>(1.0, static_cast<double>(n) - 3.0);
  const double s2 = cost / dof;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(j.transpose() * j);
  fit.covariance = s2 * cod.pseudoInverse();
  const double p_err = std::sqrt(std::max(0.0, fit.covariance(1, 1)));
  fit.r_c_err = (dd - 1.0) / dd * p_err;
  fit.mean_primitives = mean_primitives;
  const double pp = std::pow(fit.p, 1.0 / mean_primitives);
  fit.primitive_fidelity = 1.0 - (dd - 1.0) / dd * (1.0 - pp);
  const double dpp = pp / (mean_primitives * fit.p);
  fit.primitive_fidelity_err = (dd - 1.0) / dd * dpp * p_err;
  return fit;
}

RbFit fit_rb_decay(const RbDataset& dataset, double mean_primitives, int dim) {
  std::vector<double> l, s;
  for (const ExperimentRecord& r : dataset.records) {
    if (r.clifford_length < 1) throw DataError("RB record without a Clifford length");
    l.push_back(r.clifford_length);
    s.push_back(static_cast<double>(r.counts.at(0)) / static_cast<double>(r.shots));
  }
  return fit_rb_decay(l, s, mean_primitives, dim);
}

GaussianBelief rb_prior_update(const GaussianBelief& belief, const GateSet& like,
                               double f_mean, double sigma_f, const RbPriorOptions& options) {
  if (!(sigma_f > 0)) throw ValidationError("sigma_f must be > 0");
  if (options.n_samples < 10) throw ValidationError("n_samples must be >= 10");
  const ParameterPacking& packing = belief.packing();
  const int n = options.n_samples;
  const int d = 1 << like.n_qubits;
  const double tr_lo = 1.0, tr_hi = double(d) * d;
  Rng rng(options.seed);
  std::normal_distribution<double> normal(f_mean, sigma_f);

  Matrix samples(belief.dim(), n);
  const Matrix dev = belief.sample_deviations(n, rng);
  for (int s = 0; s < n; ++s) {
    double f = 0.0;
    int tries = 0;
    while (true) {
      f = normal(rng);
      const double tr = trace_for_fidelity(f, d, options.projection.convention);
      if (tr > tr_lo + 1e-12 && tr <= tr_hi) break;
      if (++tries >= 100) {
        throw ValidationError("fidelity draws keep falling outside the feasible range");
      }
    }
    const GateSet gs = unpack(belief.mean() + dev.col(s), like, packing);
    const GateSetProjection proj = project_gateset_with_fidelity(gs, f, options.projection);
    samples.col(s) = pack(proj.gateset, packing);
  }
  Vector mean = samples.rowwise().mean();
  Matrix factor = (samples.colwise() - mean) / std::sqrt(static_cast<double>(n - 1));
  if (options.floor_sigma > 0) {
    Matrix full(factor.rows(), factor.cols() + factor.rows());
    full << factor, Matrix::Identity(factor.rows(), factor.rows()) * options.floor_sigma;
    factor = std::move(full);
  }
  GaussianBelief out(std::move(mean), std::move(factor), packing);
  out.compress();
  return out;
}

std::vector<ExperimentRecord> rb_to_fbt_records(const RbDataset& dataset) {
  return dataset.records;
}

}  // namespace fbt
