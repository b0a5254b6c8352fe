#include "apm/inference.hpp"

#include "apm/error.hpp"
#include "apm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace apm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate) {
  return splitmix64(splitmix64(seed) ^ splitmix64(replicate + 0x632BE59BD9B4E019ULL));
}

Vector draw_weights(int n, std::mt19937_64& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one weight");
  std::exponential_distribution<double> exp1(1.0);
  Vector xi(n);
  for (int i = 0; i < n; ++i) xi(i) = exp1(rng);
  return xi / xi.sum();
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double iqr_se(std::span<const double> column) {
  if (column.size() < 2) throw Error(ErrorCode::InvalidArgument, "iqr_se needs M >= 2");
  const double iqr = quantile(column, 0.75) - quantile(column, 0.25);
  if (!(iqr > 0.0)) throw Error(ErrorCode::ZeroSpread, "replicate interquartile range is zero");
  return iqr / kNormalIqr;
}

double critical_value(const Matrix& replicates, const Vector& theta_hat, const Vector& sigma,
                      double alpha, bool centered) {
  const auto p = replicates.cols();
  if (theta_hat.size() != p || sigma.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "replicates, estimates and sigma disagree");
  }
  if (!(sigma.array() > 0.0).all()) {
    throw Error(ErrorCode::InvalidArgument, "critical value needs positive standard errors");
  }
  std::vector<double> z(replicates.rows());
  for (Eigen::Index m = 0; m < replicates.rows(); ++m) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double centre = centered ? theta_hat(j) : 0.0;
      worst = std::max(worst, std::abs(replicates(m, j) - centre) / sigma(j));
    }
    z[m] = worst;
  }
  return quantile(z, 1.0 - alpha);
}

BootstrapResult summarize_replicates(const Vector& theta_hat, const Matrix& replicates,
                                     double alpha, bool centered) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  const auto p = theta_hat.size();
  BootstrapResult out;
  out.theta_hat = theta_hat;
  out.replicates = replicates;
  out.alpha = alpha;
  out.centered = centered;
  out.sigma_hat.resize(p);
  out.degenerate.assign(p, false);

  std::vector<double> column(replicates.rows());
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index m = 0; m < replicates.rows(); ++m) column[m] = replicates(m, j);
    double sigma = 0.0;
    try {
      sigma = iqr_se(column);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroSpread) throw;
    }
    const double floor = 1e-12 * std::abs(theta_hat(j)) + 1e-300;
    if (sigma <= floor) {
      out.degenerate[j] = true;
      out.warnings.push_back("parameter " + std::to_string(j) +
                             " has a degenerate bootstrap distribution");
      sigma = floor;
    }
    out.sigma_hat(j) = sigma;
  }
  out.q_crit = critical_value(replicates, theta_hat, out.sigma_hat, alpha, centered);
  out.intervals.resize(p, 2);
  for (Eigen::Index j = 0; j < p; ++j) {
    out.intervals(j, 0) = theta_hat(j) - out.q_crit * out.sigma_hat(j);
    out.intervals(j, 1) = theta_hat(j) + out.q_crit * out.sigma_hat(j);
  }
  return out;
}

BootstrapResult bootstrap(const Panel& panel, const EstimatorConfig& config,
                          const TargetSpec& target, const BootstrapOptions& options) {
  if (options.replicates < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs M >= 2");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  const CohortIndex index = cohortize(panel, config.min_cohort_size);
  validate_target(target, index);
  const Estimate point = estimate_all(panel, index, config);
  const Vector theta_hat = evaluate_target(target, point.means, index);
  const auto p = theta_hat.size();

  const int m_total = options.replicates;
  Matrix draws(m_total, p);
  std::vector<char> ok(m_total, 0);
  std::vector<std::string> failures(m_total);
  parallel_for(m_total, options.threads, [&](int m) {
    std::mt19937_64 rng(replicate_seed(options.seed, static_cast<std::uint64_t>(m)));
    const Vector w = draw_weights(panel.n_units(), rng);
    try {
      const Estimate est = estimate_all(panel, index, config, {w.data(), static_cast<std::size_t>(w.size())});
      draws.row(m) = evaluate_target(target, est.means, index).transpose();
      ok[m] = 1;
    } catch (const Error& e) {
      failures[m] = e.what();
    }
  });

  const int failed = static_cast<int>(std::count(ok.begin(), ok.end(), 0));
  if (failed > options.max_failure_rate * m_total) {
    std::string first;
    for (const auto& f : failures) {
      if (!f.empty()) {
        first = f;
        break;
      }
    }
    throw Error(ErrorCode::ReplicateFailure, std::to_string(failed) + " of " +
                                                 std::to_string(m_total) +
                                                 " replicates failed; first: " + first);
  }
  Matrix kept(m_total - failed, p);
  for (int m = 0, row = 0; m < m_total; ++m) {
    if (ok[m]) kept.row(row++) = draws.row(m);
  }

  BootstrapResult out = summarize_replicates(theta_hat, kept, options.alpha, options.centered);
  out.requested_replicates = m_total;
  out.seed = options.seed;
  out.failed_replicates = failed;
  if (failed > 0) {
    out.warnings.push_back(std::to_string(failed) + " replicate(s) failed and were dropped");
  }
  for (const auto& w : point.warnings) out.warnings.push_back(w);
  return out;
}

}  // namespace apm
