#pragma once

#include "apm/estimate.hpp"
#include "apm/linalg.hpp"
#include "apm/panel.hpp"
#include "apm/targets.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace apm {

/// q_{0.75}(Z) - q_{0.25}(Z) for a standard normal Z.
constexpr double kNormalIqr = 1.348979500;

/// Normalised Exponential(1) draws: a Bayesian-bootstrap weight vector.
Vector draw_weights(int n, std::mt19937_64& rng);

/// Order-independent per-replicate stream seed.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::span<const double> values, double p);

/// Interquartile range over the normal IQR. Throws ZeroSpread when the
/// sample quartiles coincide.
double iqr_se(std::span<const double> column);

/// (1 - alpha) quantile of z*_m = max_j |θ*_mj - θ̂_j| / σ_j (centered) or
/// max_j |θ*_mj| / σ_j (literal).
double critical_value(const Matrix& replicates, const Vector& theta_hat, const Vector& sigma,
                      double alpha, bool centered = true);

struct BootstrapOptions {
  int replicates = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool centered = true;
  int threads = 1;
  double max_failure_rate = 0.05;
};

struct BootstrapResult {
  Vector theta_hat;
  Matrix replicates;  // successful replicates only, M' x p
  Vector sigma_hat;
  double q_crit = 0.0;
  Matrix intervals;  // p x 2, (lo, hi)
  double alpha = 0.05;
  int requested_replicates = 0;
  std::uint64_t seed = 0;
  int failed_replicates = 0;
  bool centered = true;
  std::vector<bool> degenerate;  // σ̂_j hit the positivity floor
  std::vector<std::string> warnings;
};

/// Standard errors, critical value and simultaneous intervals from a
/// replicate matrix.
BootstrapResult summarize_replicates(const Vector& theta_hat, const Matrix& replicates,
                                     double alpha, bool centered);

/// Bayesian bootstrap over the full weighted pipeline.
BootstrapResult bootstrap(const Panel& panel, const EstimatorConfig& config,
                          const TargetSpec& target, const BootstrapOptions& options);

}  // namespace apm
