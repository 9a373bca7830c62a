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

// Online linear-Gaussian estimation of a gate set.
//
// The belief over the packed noise parameters is N(mean, F F^T). Only the
// factor F (P x r) is stored, so updates cost O(P r M) and sampling O(P r n)
// without ever refactorising a P x P covariance. Every update linearises the
// sequence model at the current mean, accounts for the approximation error
// of that linearisation (sampled from the current belief) and for multinomial
// shot noise, and applies the closed-form conjugate update.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "fbt/forward_model.hpp"
#include "fbt/gateset.hpp"
#include "fbt/records.hpp"
#include "fbt/types.hpp"

namespace fbt {

using Rng = std::mt19937_64;

// Deterministic sub-stream seed derived from a base seed and a stream index.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

class GaussianBelief {
 public:
  GaussianBelief() = default;
  // Covariance factor * factor^T; factor is P x r with any r >= 1.
  GaussianBelief(Vector mean, Matrix factor, ParameterPacking packing);

  // Factorises a symmetric PSD covariance. Throws ValidationError if it is not
  // symmetric to 1e-10 or has an eigenvalue below -1e-9 * max(1, ||cov||).
  static GaussianBelief from_covariance(Vector mean, const Matrix& covariance,
                                        ParameterPacking packing);
  // Independent coordinates with the given standard deviations.
  static GaussianBelief diagonal(Vector mean, const Vector& sigmas,
                                 ParameterPacking packing);

  int dim() const { return static_cast<int>(mean_.size()); }
  int rank() const { return static_cast<int>(factor_.cols()); }
  const Vector& mean() const { return mean_; }
  const Matrix& factor() const { return factor_; }
  const ParameterPacking& packing() const { return packing_; }

  // Dense P x P covariance; O(P^2 r).
  Matrix covariance() const;
  double trace() const { return factor_.squaredNorm(); }
  Vector variances() const { return factor_.rowwise().squaredNorm(); }

  // P x n matrix of deviations x ~ N(0, Gamma).
  Matrix sample_deviations(int n, Rng& rng) const;

  // Mean channels written into a copy of like.
  GateSet mean_gateset(const GateSet& like) const;

  // Re-expresses the factor with at most P columns (thin QR); the
  // covariance is unchanged.
  void compress();

 private:
  Vector mean_;
  Matrix factor_;
  ParameterPacking packing_;
};

// Default prior: mean = current gate-set noise (identity unless set), and
// independent entries with one standard deviation per channel class.
struct PriorSpec {
  double pulsed_sigma = 0.05;
  double virtual_sigma = 0.005;
  double spam_sigma = 0.05;
};

GaussianBelief default_prior(const GateSet& gateset, const PriorSpec& spec = {});

// Approximation-error and shot-noise statistics for one setting.
struct NoiseStats {
  Vector eta_mean;    // M
  Matrix eta_cov;     // M x M
  Matrix eta_x_cov;   // M x P, cross-covariance with the parameters
  // Cross-covariance in the belief's whitened coordinates z (x = F z),
  // i.e. eta_x_cov = eta_z_cov F^T. Empty when not sampled.
  Matrix eta_z_cov;   // M x r
  Matrix eps_cov;     // M x M
  int sample_count = 0;

  double approx_error_magnitude() const;  // Tr(eta_cov) + ||eta_mean||^2

  // Shot noise only; the approximation error is neglected.
  static NoiseStats shot_noise_only(Matrix eps_cov, int num_params);
};

// Multinomial covariance of the empirical frequency vector:
// p_i (1 - p_i) / N on the diagonal and -p_i p_j / N off it, with p ~ m.
// Throws ValidationError for N < 1 or invalid frequencies.
Matrix shot_noise_covariance(const Vector& frequencies, int64_t shots);

// Raises each diagonal entry to at least max(p_i (1 - p_i), 1/N) / N and adds
// jitter to the diagonal, making the covariance invertible.
Matrix regularize_shot_noise(Matrix covariance, const Vector& frequencies,
                             int64_t shots, double jitter = 1e-12);

struct SamplingOptions {
  int n_samples = 100;
  // Draw samples in +/- pairs. The pairs cancel the even-order part of the
  // approximation error in the cross-covariance estimate.
  bool antithetic = true;
};

// Samples x ~ N(0, Gamma), evaluates the exact model at mean + x and forms
// the joint statistics of (x, eta, eps). eps is multinomial shot noise drawn
// around each sampled probability vector (probabilities are clipped to
// [0, 1] and renormalised for the draw). eps_cov is returned unregularised.
NoiseStats sample_noise_stats(const GaussianBelief& belief,
                              const LinearizedSetting& setting, const GateSet& like,
                              int64_t shots, const SamplingOptions& options, Rng& rng);

// e | x ~ N(offset + C x, cov) with C = (Gamma_eta_x) Gamma_x^{-1}.
struct ConditionalNoise {
  Vector offset;          // eta_mean (+ eps mean, which is zero)
  Matrix gain_whitened;   // C F, M x r
  Matrix cov;             // Gamma_eta + Gamma_eps - C Gamma_x C^T

  // C itself (M x P) via the pseudo-inverse of F; O(P^2 r), for diagnostics.
  Matrix gain(const GaussianBelief& belief) const;
};

// Throws NumericalError if the conditional covariance has an eigenvalue below
// -1e-8 * max(1, largest |eigenvalue|) after symmetrisation.
ConditionalNoise conditional_noise(const NoiseStats& stats, const GaussianBelief& belief);

struct UpdateDiagnostics {
  int step = 0;
  double trace_post = 0.0;
  double trace_eps = 0.0;
  // Tr(Gamma_eta) + ||eta_mean||^2 of this step; empty on the fast path.
  std::optional<double> approx_error;
  bool dominance = false;
  bool sampled = false;
  double wall_time = 0.0;  // seconds
};

struct UpdateResult {
  GaussianBelief belief;
  UpdateDiagnostics diagnostics;
};

// Conjugate update for one setting with observed frequencies m. The mean
// solves the stacked least-squares problem with operator
// [L_e (A + C); L_x] and the covariance is
// (Gamma_x^{-1} + (A + C)^T Gamma_e|x^{-1} (A + C))^{-1}, both computed in
// Kalman/square-root form.
UpdateResult posterior_update(const GaussianBelief& belief,
                              const LinearizedSetting& setting, const Vector& m,
                              const NoiseStats& stats);

// Tr(eps_cov) >= ratio * (Tr(eta_cov) + ||eta_mean||^2).
bool dominance_check(const NoiseStats& stats, double threshold_ratio = 100.0);

// Moving-average form of dominance_check over the last window sampled steps.
class DominanceMonitor {
 public:
  explicit DominanceMonitor(int window = 100, double ratio = 100.0);
  void push(double trace_eps, double approx_error);
  // True once window entries exist and the averaged condition holds.
  bool satisfied() const;
  double mean_trace_eps() const;
  double mean_approx_error() const;
  int count() const { return count_; }

 private:
  int window_;
  double ratio_;
  std::vector<double> eps_;
  std::vector<double> approx_;
  int count_ = 0;
  double sum_eps_ = 0.0;
  double sum_approx_ = 0.0;
};

struct EngineOptions {
  SamplingOptions sampling;
  double dominance_ratio = 100.0;
  int dominance_window = 100;
  // Once dominance holds, stop sampling and use e | x = eps.
  bool enable_fast_path = true;
  // Use the sampled cross-covariance Gamma_eta_x in the likelihood. The
  // sampled gain is shrunk when needed so Gamma_e|x stays PSD.
  bool use_cross_covariance = false;
  double eps_jitter = 1e-12;
  uint64_t seed = 1;
};

// Single-writer online estimator: fold of linearise -> noise statistics ->
// conjugate update over a stream of records.
class OnlineEstimator {
 public:
  OnlineEstimator(GaussianBelief prior, GateSet like, EngineOptions options = {});

  // Throws DataError naming the step for malformed records.
  UpdateDiagnostics update(const ExperimentRecord& record);

  const GaussianBelief& belief() const { return belief_; }
  const GateSet& like() const { return like_; }
  const EngineOptions& options() const { return options_; }
  bool fast_path_active() const { return fast_path_; }
  int steps() const { return step_; }
  const DominanceMonitor& monitor() const { return monitor_; }

 private:
  GaussianBelief belief_;
  GateSet like_;
  EngineOptions options_;
  DominanceMonitor monitor_;
  bool fast_path_ = false;
  int step_ = 0;
};

struct RunResult {
  GaussianBelief belief;
  std::vector<UpdateDiagnostics> diagnostics;
  // Step (1-based) at which the fast path switched on, 0 if never.
  int dominance_step = 0;
};

using DiagnosticsCallback = std::function<void(const UpdateDiagnostics&)>;

RunResult run_online(GaussianBelief prior, std::span<const ExperimentRecord> records,
                     const GateSet& like, const EngineOptions& options = {},
                     const DiagnosticsCallback& on_step = {});

// {step, trace_post, trace_eps, approx_err, dominance, wall_time}.
std::string diagnostics_to_json_line(const UpdateDiagnostics& d);

}  // namespace fbt
