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
#include "fbt/bayes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "fbt/error.hpp"
#include "json.hpp"

namespace fbt {

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 finaliser over the combined words
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GaussianBelief::GaussianBelief(Vector mean, Matrix factor, ParameterPacking packing)
    : mean_(std::move(mean)), factor_(std::move(factor)), packing_(std::move(packing)) {
  if (mean_.size() != packing_.total()) {
    throw ValidationError("belief mean has length " + std::to_string(mean_.size()) +
                          ", packing expects " + std::to_string(packing_.total()));
  }
  if (factor_.rows() != mean_.size() || factor_.cols() < 1) {
    throw ValidationError("covariance factor must be P x r with r >= 1");
  }
  if (!mean_.allFinite() || !factor_.allFinite()) {
    throw ValidationError("belief contains non-finite values");
  }
}

GaussianBelief GaussianBelief::from_covariance(Vector mean, const Matrix& covariance,
                                               ParameterPacking packing) {
  const Eigen::Index p = covariance.rows();
  if (covariance.cols() != p || p != mean.size()) {
    throw ValidationError("covariance shape does not match the mean");
  }
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError("covariance is not symmetric");
  }
  Matrix sym = 0.5 * (covariance + covariance.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    return GaussianBelief(std::move(mean), llt.matrixL(), std::move(packing));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw ValidationError("covariance is not positive semidefinite (min eigenvalue " +
                          std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix factor = eig.eigenvectors() * root.asDiagonal();
  return GaussianBelief(std::move(mean), std::move(factor), std::move(packing));
}

GaussianBelief GaussianBelief::diagonal(Vector mean, const Vector& sigmas,
                                        ParameterPacking packing) {
  if (sigmas.size() != mean.size() || (sigmas.array() < 0).any()) {
    throw ValidationError("sigmas must be non-negative and match the mean");
  }
  Matrix factor = sigmas.asDiagonal();
  return GaussianBelief(std::move(mean), std::move(factor), std::move(packing));
}

Matrix GaussianBelief::covariance() const { return factor_ * factor_.transpose(); }

Matrix GaussianBelief::sample_deviations(int n, Rng& rng) const {
  std::normal_distribution<double> normal;
  Matrix z(rank(), n);
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
  return factor_ * z;
}

GateSet GaussianBelief::mean_gateset(const GateSet& like) const {
  return unpack(mean_, like, packing_);
}

void GaussianBelief::compress() {
  if (factor_.cols() <= factor_.rows()) return;
  Eigen::HouseholderQR<Matrix> qr(factor_.transpose());
  const Eigen::Index p = factor_.rows();
  Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  factor_ = r.transpose();
}

GaussianBelief default_prior(const GateSet& gateset, const PriorSpec& spec) {
  ParameterPacking packing = ParameterPacking::for_gateset(gateset);
  Vector sigmas(packing.total());
  for (const ChannelSlice& ch : packing.channels()) {
    double s = spec.spam_sigma;
    if (ch.kind == ChannelKind::kGate) {
      s = gateset.gates[ch.gate].is_virtual ? spec.virtual_sigma : spec.pulsed_sigma;
    }
    sigmas.segment(ch.offset, ch.length).setConstant(s);
  }
  Vector mean = pack(gateset, packing);
  return GaussianBelief::diagonal(std::move(mean), sigmas, std::move(packing));
}

double NoiseStats::approx_error_magnitude() const {
  return eta_cov.trace() + eta_mean.squaredNorm();
}

NoiseStats NoiseStats::shot_noise_only(Matrix eps_cov, int num_params) {
  NoiseStats s;
  const Eigen::Index m = eps_cov.rows();
  s.eta_mean = Vector::Zero(m);
  s.eta_cov = Matrix::Zero(m, m);
  s.eta_x_cov = Matrix::Zero(m, num_params);
  s.eps_cov = std::move(eps_cov);
  return s;
}

namespace {

void check_frequencies(const Vector& p) {
  if (p.size() < 1) throw ValidationError("empty probability vector");
  if ((p.array() < -1e-12).any() || (p.array() > 1 + 1e-12).any()) {
    throw ValidationError("probabilities must lie in [0, 1]");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) {
    throw ValidationError("probabilities must sum to 1");
  }
}

// Counts from one multinomial draw via conditional binomials.
namespace {

Vector clip_to_distribution(const Vector& p) {
  Vector probs = p.cwiseMax(0.0).cwiseMin(1.0);
  const double total = probs.sum();
  if (total <= 0) probs.setConstant(1.0 / probs.size());
  else probs /= total;
  return probs;
}

}  // namespace

Vector multinomial_frequencies(const Vector& p, int64_t shots, Rng& rng) {
  const Vector probs = clip_to_distribution(p);
  Vector freq = Vector::Zero(p.size());
  int64_t left = shots;
  double mass = 1.0;
  for (Eigen::Index i = 0; i + 1 < p.size() && left > 0; ++i) {
    const double q = mass > 0 ? std::clamp(probs(i) / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<int64_t> bin(left, q);
    const int64_t k = bin(rng);
    freq(i) = static_cast<double>(k);
    left -= k;
    mass -= probs(i);
  }
  freq(p.size() - 1) += static_cast<double>(left);
  return freq / static_cast<double>(shots);
}

Eigen::LLT<Matrix> robust_llt(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * std::max(a.trace() / a.rows(), 1e-300);
  Matrix b = a;
  b.diagonal().array() += jitter;
  llt.compute(b);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  return llt;
}

}  // namespace

Matrix shot_noise_covariance(const Vector& frequencies, int64_t shots) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  check_frequencies(frequencies);
  const Vector p = frequencies.cwiseMax(0.0);
  Matrix cov = -(p * p.transpose());
  cov.diagonal() += p;
  return cov / static_cast<double>(shots);
}

Matrix regularize_shot_noise(Matrix covariance, const Vector& frequencies,
                             int64_t shots, double jitter) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  const double n = static_cast<double>(shots);
  for (Eigen::Index i = 0; i < covariance.rows(); ++i) {
    const double p = std::clamp(frequencies(i), 0.0, 1.0);
    const double floor = std::max(p * (1 - p), 1.0 / n) / n;
    covariance(i, i) = std::max(covariance(i, i), floor) + jitter;
  }
  return covariance;
}

NoiseStats sample_noise_stats(const GaussianBelief& belief,
                              const LinearizedSetting& setting, const GateSet& like,
                              int64_t shots, const SamplingOptions& options, Rng& rng) {
  if (options.n_samples < 2) throw ConfigError("n_samples must be >= 2");
  if (shots < 1) throw ValidationError("shots must be >= 1");
  const int r = belief.rank();
  const Eigen::Index m = setting.m_bar.size();
  int n = options.n_samples;
  if (options.antithetic && n % 2 == 1) ++n;

  std::normal_distribution<double> normal;
  Matrix z(r, n);
  const int draws = options.antithetic ? n / 2 : n;
  for (int j = 0; j < draws; ++j)
    for (int i = 0; i < r; ++i) z(i, j) = normal(rng);
  if (options.antithetic) z.rightCols(draws) = -z.leftCols(draws);
  const Matrix x = belief.factor() * z;

  const Vector offset = belief.mean() - setting.expansion_point;
  const Vector base = setting.m_bar + setting.a_bar * offset;
  const Matrix lin = setting.a_bar * x;

  Matrix eta(m, n), eps(m, n);
  Vector lambda(belief.dim());
  for (int s = 0; s < n; ++s) {
    lambda = belief.mean() + x.col(s);
    const Vector p =
        exact_forward(lambda, setting.sequence, like, belief.packing());
    eta.col(s) = p - base - lin.col(s);
    // Centred on the distribution actually sampled, so an unphysical p does
    // not leak its clipping offset into the shot noise.
    eps.col(s) = multinomial_frequencies(p, shots, rng) - clip_to_distribution(p);
  }

  NoiseStats stats;
  stats.sample_count = n;
  stats.eta_mean = eta.rowwise().mean();
  const Matrix ec = eta.colwise() - stats.eta_mean;
  const Vector z_mean = z.rowwise().mean();
  const Matrix zc = z.colwise() - z_mean;
  const Vector eps_mean = eps.rowwise().mean();
  const Matrix pc = eps.colwise() - eps_mean;
  const double denom = static_cast<double>(n - 1);
  stats.eta_cov = ec * ec.transpose() / denom;
  stats.eta_z_cov = ec * zc.transpose() / denom;
  stats.eta_x_cov = stats.eta_z_cov * belief.factor().transpose();
  stats.eps_cov = pc * pc.transpose() / denom;
  return stats;
}

Matrix ConditionalNoise::gain(const GaussianBelief& belief) const {
  // C F = G  =>  F^T C^T = G^T
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(belief.factor().transpose());
  return cod.solve(gain_whitened.transpose()).transpose();
}

ConditionalNoise conditional_noise(const NoiseStats& stats, const GaussianBelief& belief) {
  const Eigen::Index m = stats.eps_cov.rows();
  if (stats.eta_cov.rows() != m || stats.eta_mean.size() != m) {
    throw ValidationError("noise statistics have inconsistent sizes");
  }
  ConditionalNoise out;
  out.offset = stats.eta_mean;
  if (stats.eta_z_cov.size() > 0 && stats.eta_z_cov.cols() == belief.rank()) {
    out.gain_whitened = stats.eta_z_cov;
  } else if (stats.eta_x_cov.size() > 0 && stats.eta_x_cov.cwiseAbs().maxCoeff() > 0) {
    if (stats.eta_x_cov.cols() != belief.dim()) {
      throw ValidationError("eta_x_cov has the wrong number of columns");
    }
    // Gamma_eta_x = G F^T  =>  F G^T = Gamma_x_eta
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(belief.factor());
    out.gain_whitened = cod.solve(stats.eta_x_cov.transpose()).transpose();
  } else {
    out.gain_whitened = Matrix::Zero(m, belief.rank());
  }
  Matrix cov = stats.eta_cov + stats.eps_cov -
               out.gain_whitened * out.gain_whitened.transpose();
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  // relative to the scale: long sequences under a wide belief give huge eta
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw NumericalError("conditional noise covariance is indefinite (min eigenvalue " +
                         std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }
  out.cov = std::move(cov);
  return out;
}

UpdateResult posterior_update(const GaussianBelief& belief,
                              const LinearizedSetting& setting, const Vector& m,
                              const NoiseStats& stats) {
  const Eigen::Index mo = setting.m_bar.size();
  if (m.size() != mo) {
    throw ValidationError("observation has " + std::to_string(m.size()) +
                          " outcomes, model has " + std::to_string(mo));
  }
  if (setting.a_bar.cols() != belief.dim()) {
    throw ValidationError("linearisation does not match the belief dimension");
  }
  const ConditionalNoise cond = conditional_noise(stats, belief);
  const Matrix& f = belief.factor();

  const Matrix v = setting.a_bar * f + cond.gain_whitened;  // M x r
  const Matrix& r = cond.cov;
  Matrix d = v * v.transpose() + r;
  const auto llt_d = robust_llt(d, "innovation covariance");
  const auto llt_r = robust_llt(r, "conditional noise covariance");

  const Vector y = m - setting.m_bar -
                   setting.a_bar * (belief.mean() - setting.expansion_point) -
                   cond.offset;
  const Vector alpha = llt_d.solve(y);
  const Matrix fvt = f * v.transpose();  // P x M

  Vector mean = belief.mean() + fvt * alpha;

  // F' = F (I - V^T K V), K = L_D^{-T} (L_D + L_R)^{-1}
  const Matrix ld = llt_d.matrixL();
  const Matrix lsum = ld + Matrix(llt_r.matrixL());
  Matrix w = lsum.triangularView<Eigen::Lower>().solve(v);
  ld.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
  Matrix factor = f - fvt * w;

  UpdateResult out{GaussianBelief(std::move(mean), std::move(factor), belief.packing()),
                   UpdateDiagnostics{}};
  out.diagnostics.trace_post = out.belief.trace();
  out.diagnostics.trace_eps = stats.eps_cov.trace();
  out.diagnostics.approx_error = stats.approx_error_magnitude();
  return out;
}

bool dominance_check(const NoiseStats& stats, double threshold_ratio) {
  return stats.eps_cov.trace() >= threshold_ratio * stats.approx_error_magnitude();
}

DominanceMonitor::DominanceMonitor(int window, double ratio)
    : window_(window), ratio_(ratio), eps_(window, 0.0), approx_(window, 0.0) {
  if (window < 1) throw ConfigError("dominance window must be >= 1");
  if (!(ratio > 0)) throw ConfigError("dominance ratio must be > 0");
}

void DominanceMonitor::push(double trace_eps, double approx_error) {
  const int slot = count_ % window_;
  if (count_ >= window_) {
    sum_eps_ -= eps_[slot];
    sum_approx_ -= approx_[slot];
  }
  eps_[slot] = trace_eps;
  approx_[slot] = approx_error;
  sum_eps_ += trace_eps;
  sum_approx_ += approx_error;
  ++count_;
}

double DominanceMonitor::mean_trace_eps() const {
  return count_ == 0 ? 0.0 : sum_eps_ / std::min(count_, window_);
}

double DominanceMonitor::mean_approx_error() const {
  return count_ == 0 ? 0.0 : sum_approx_ / std::min(count_, window_);
}

bool DominanceMonitor::satisfied() const {
  return count_ >= window_ && mean_trace_eps() >= ratio_ * mean_approx_error();
}

namespace {

// With r > n_samples the sampled gain G can satisfy G G^T > Gamma_eta + Gamma_eps.
// Scale it by the largest factor that keeps the Schur complement PSD.
void shrink_cross_covariance(NoiseStats& stats) {
  if (stats.eta_z_cov.size() == 0) return;
  const Matrix total = stats.eta_cov + stats.eps_cov;
  Eigen::LLT<Matrix> llt(total);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("noise covariance is not positive definite");
  }
  const Matrix w = llt.matrixL().solve(stats.eta_z_cov);
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(w * w.transpose(),
                                                           Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  if (top > 0.99) {
    const double scale = std::sqrt(0.99 / top);
    stats.eta_z_cov *= scale;
    stats.eta_x_cov *= scale;
  }
}

}  // namespace

OnlineEstimator::OnlineEstimator(GaussianBelief prior, GateSet like, EngineOptions options)
    : belief_(std::move(prior)),
      like_(std::move(like)),
      options_(options),
      monitor_(options.dominance_window, options.dominance_ratio) {
  if (!(ParameterPacking::for_gateset(like_) == belief_.packing())) {
    throw ConfigError("prior packing does not match the gate set");
  }
  if (options_.sampling.n_samples < 2) throw ConfigError("n_samples must be >= 2");
}

UpdateDiagnostics OnlineEstimator::update(const ExperimentRecord& record) {
  const auto start = std::chrono::steady_clock::now();
  const int step = step_ + 1;
  const int outcomes = like_.povm.num_outcomes();
  try {
    record.validate(outcomes);
    validate_sequence(record.sequence, like_.num_gates());
  } catch (const Error& e) {
    throw DataError("record " + std::to_string(step) + ": " + e.what());
  }

  const GateSet mean_gs = belief_.mean_gateset(like_);
  const LinearizedSetting setting = linearize(mean_gs, belief_.packing(), record.sequence);
  const Vector m = record.frequencies();

  NoiseStats stats;
  bool sampled = false;
  if (fast_path_) {
    stats = NoiseStats::shot_noise_only(
        regularize_shot_noise(shot_noise_covariance(m, record.shots), m, record.shots,
                              options_.eps_jitter),
        belief_.dim());
  } else {
    Rng rng(derive_seed(options_.seed, static_cast<uint64_t>(step)));
    stats = sample_noise_stats(belief_, setting, like_, record.shots, options_.sampling,
                               rng);
    stats.eps_cov =
        regularize_shot_noise(stats.eps_cov, m, record.shots, options_.eps_jitter);
    if (options_.use_cross_covariance) {
      shrink_cross_covariance(stats);
    } else {
      stats.eta_z_cov.resize(0, 0);
      stats.eta_x_cov.resize(0, 0);
    }
    sampled = true;
    monitor_.push(stats.eps_cov.trace(), stats.approx_error_magnitude());
  }

  UpdateResult result = posterior_update(belief_, setting, m, stats);
  belief_ = std::move(result.belief);
  step_ = step;

  UpdateDiagnostics diag = result.diagnostics;
  diag.step = step;
  diag.sampled = sampled;
  if (!sampled) diag.approx_error.reset();
  diag.dominance = fast_path_ || monitor_.satisfied();
  if (options_.enable_fast_path && monitor_.satisfied()) fast_path_ = true;
  diag.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return diag;
}

RunResult run_online(GaussianBelief prior, std::span<const ExperimentRecord> records,
                     const GateSet& like, const EngineOptions& options,
                     const DiagnosticsCallback& on_step) {
  OnlineEstimator engine(std::move(prior), like, options);
  RunResult out;
  out.diagnostics.reserve(records.size());
  for (const ExperimentRecord& rec : records) {
    const bool was_fast = engine.fast_path_active();
    out.diagnostics.push_back(engine.update(rec));
    if (!was_fast && engine.fast_path_active() && out.dominance_step == 0) {
      out.dominance_step = engine.steps();
    }
    if (on_step) on_step(out.diagnostics.back());
  }
  out.belief = engine.belief();
  return out;
}

std::string diagnostics_to_json_line(const UpdateDiagnostics& d) {
  nlohmann::ordered_json j;
  j["step"] = d.step;
  j["trace_post"] = d.trace_post;
  j["trace_eps"] = d.trace_eps;
  if (d.approx_error) j["approx_err"] = *d.approx_error;
  else j["approx_err"] = nullptr;
  j["dominance"] = d.dominance;
  j["sampled"] = d.sampled;
  j["wall_time"] = d.wall_time;
  return j.dump();
}

}  // namespace fbt
