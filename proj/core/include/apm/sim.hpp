#pragma once

#include "apm/estimate.hpp"
#include "apm/linalg.hpp"
#include "apm/panel.hpp"
#include "apm/perturb.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace apm {

enum class NoiseKind { Homoskedastic, Heteroskedastic };
enum class LoadingDistribution { Gaussian, Uniform };

struct CohortDgp {
  double prob = 0.0;
  Vector loading_mean;  // E[λ | c], length r
  Matrix loading_cov;   // Var(λ | c), r x r, positive definite
  IndexSet t_set;       // observed outcomes
  double noise_var = 0.0;  // σ²_c (homoskedastic)
  Vector noise_vars;       // σ²_ct, length T (heteroskedastic)
};

/// Ground truth of a rank-r factor DGP y_it = γ_t'λ_i + ε_it.
struct DgpTruth {
  Matrix gamma;  // T x r, rows γ_t
  std::vector<CohortDgp> cohorts;
  NoiseKind noise = NoiseKind::Homoskedastic;
  LoadingDistribution loadings = LoadingDistribution::Gaussian;

  int n_outcomes() const { return static_cast<int>(gamma.rows()); }
  int rank() const { return static_cast<int>(gamma.cols()); }
  int n_cohorts() const { return static_cast<int>(cohorts.size()); }

  /// μ_ct = γ_t' E[λ | c].
  Matrix mu_true() const;
  Vector cohort_probs() const;
  /// E[λλ' | c].
  Matrix loading_second_moment(int cohort) const;
  /// Population V_c = E_c (Γ E[λλ'|c] Γ' + Σ_ε,c) E_c.
  Matrix population_second_moment(int cohort) const;
  std::vector<std::string> outcome_ids() const;
  /// Throws InvalidArgument on any violated invariant.
  void validate() const;
};

/// Named missingness layouts.
struct MissingnessPattern {
  enum class Kind { Block, Staircase, ThreeCohort, StaggeredEventStudy, Custom };

  Kind kind = Kind::ThreeCohort;
  int n_cohorts = 3;
  int n_outcomes = 4;
  int width = 2;       // Staircase: outcomes per cohort
  int pre_window = 2;  // StaggeredEventStudy: observed pre-periods
  std::vector<IndexSet> custom;

  /// Cohort 0 misses the last outcome, cohort 1 observes everything.
  static MissingnessPattern block(int n_outcomes);
  /// Cohort c observes {c, ..., c + width - 1}.
  static MissingnessPattern staircase(int n_cohorts, int width = 2);
  /// {0,1}, {1,2}, {2,3}.
  static MissingnessPattern three_cohort();
  /// Cohort c is treated at period pre_window + c and observes the
  /// pre_window periods before that.
  static MissingnessPattern staggered(int n_cohorts, int pre_window);
  static MissingnessPattern from_sets(std::vector<IndexSet> sets, int n_outcomes);

  std::vector<IndexSet> t_sets() const;
  int outcomes() const;
};

struct GenerateOptions {
  // Redraw cohort memberships (up to 1000 times) instead of failing when a
  // cohort receives no units.
  bool redraw_empty = false;
};

struct SimulatedPanel {
  Panel panel;
  std::vector<int> truth_cohort;  // per unit, index into DgpTruth::cohorts
  Matrix loadings;                // N x r
};

SimulatedPanel generate_detailed(const DgpTruth& truth, int n, std::uint64_t seed,
                                 const GenerateOptions& options = {});
Panel generate(const DgpTruth& truth, int n, std::uint64_t seed,
               const GenerateOptions& options = {});

/// Two-way fixed effects y_it = a_i + g_t fitted on observed cells, with
/// Σ_t g_t = 0. Returns C x T imputed means mean_{i in c} a_i + g_t.
Matrix twfe_estimate(const Panel& panel, const CohortIndex& index,
                     std::span<const double> weights = {});

enum class MaskEstimator { APM, TWFE };
std::string_view to_string(MaskEstimator estimator) noexcept;

struct MaskTarget {
  int cohort = 0;
  int outcome = 0;
};

struct MaskMetrics {
  MaskTarget target;
  MaskEstimator estimator = MaskEstimator::APM;
  bool identified = true;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double abs_bias = 0.0;
  double se = 0.0;
  double rmse = 0.0;
};

struct MaskEvalOptions {
  int reps = 100;
  std::uint64_t seed = 0;
  std::vector<MaskEstimator> estimators{MaskEstimator::APM, MaskEstimator::TWFE};
  EstimatorConfig config;
  int threads = 1;
  // Throw UnidentifiedAfterMask instead of reporting an unidentified row.
  bool strict = false;
};

/// Masks each target cell, resamples units with replacement within cohorts
/// and scores each estimator against the pre-mask sample mean.
std::vector<MaskMetrics> mask_eval(const Panel& panel, std::span<const MaskTarget> targets,
                                   const MaskEvalOptions& options);

/// Per-unit influence function ψ_{c*}(C_i, Y_i) under the true DGP, N x T.
/// Rows of units outside `index` are zero. Requires homoskedastic noise.
Matrix oracle_influence(const DgpTruth& truth, const Panel& panel, const CohortIndex& index,
                        int target_cohort,
                        SignConvention convention = SignConvention::Validated);

/// DGP document: {T, r, gamma, cohorts, noise, loadings, seed}.
struct DgpConfig {
  DgpTruth truth;
  std::uint64_t seed = 0;
};
DgpConfig parse_dgp_json(const std::string& text);
std::string dgp_to_json(const DgpTruth& truth);

}  // namespace apm
