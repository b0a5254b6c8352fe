#pragma once

#include "apm/apm.hpp"
#include "apm/factors.hpp"
#include "apm/graph.hpp"
#include "apm/linalg.hpp"
#include "apm/panel.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apm {

/// C x T counterfactual means. Entries that could not be identified are NaN
/// with `available` false for the whole row or `identified` false per cell.
struct CohortMeans {
  Matrix mu_hat;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> observed;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> identified;
  std::vector<bool> available;
  Vector cohort_probs;  // empirical (weighted) shares of retained units
  Matrix observed_mean; // raw cohort means, zero off T_c

  int n_cohorts() const { return static_cast<int>(mu_hat.rows()); }
  int n_outcomes() const { return static_cast<int>(mu_hat.cols()); }
};

/// Per-outcome (weighted) sample mean of the cohort's members on T_c,
/// zero elsewhere.
Vector cohort_observed_mean(const Panel& panel, const CohortIndex& index, int cohort,
                            std::span<const double> weights = {});

/// μ̂_c = Γ̃ (Γ̃' E_c Γ̃)^{-1} Γ̃' E_c m̂_c.
Vector bridge_extrapolate(const Matrix& basis, const IndexSet& observed,
                          const Vector& observed_mean, double rank_tol = kDefaultRankTol);

/// R_c = I + Γ̃ (Γ̃' E_c Γ̃)^{-1} Γ̃' (I - E_c).
Matrix r_matrix(const Matrix& basis, const IndexSet& observed);

struct EstimatorConfig {
  int r = 1;
  FactorMethod method = FactorMethod::PC;
  int min_cohort_size = kDefaultMinCohortSize;
  std::optional<int> target_cohort;  // selects the component to estimate on
  double gap_floor_rel = kDefaultGapFloorRel;
  double rank_tol = kDefaultRankTol;
};

struct Estimate {
  CohortIndex index;
  CohortMeans means;
  FactorBasis basis;  // T x r, zero rows for outcomes outside `covered_outcomes`
  AggregatedProjection apm;
  std::vector<CohortFactorEstimate> factors;  // one per component cohort
  std::vector<int> component;                 // cohorts used for estimation
  std::vector<int> excluded_cohorts;
  IndexSet covered_outcomes;
  std::vector<std::string> warnings;
};

/// Full pipeline: cohortize, per-cohort factors, APM, null space, bridge.
Estimate estimate_all(const Panel& panel, const EstimatorConfig& config,
                      std::span<const double> weights = {});

/// Same, on a precomputed cohort index (used by resampling loops).
Estimate estimate_all(const Panel& panel, const CohortIndex& index, const EstimatorConfig& config,
                      std::span<const double> weights = {});

}  // namespace apm
