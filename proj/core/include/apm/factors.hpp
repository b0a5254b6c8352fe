#pragma once

#include "apm/linalg.hpp"
#include "apm/panel.hpp"

#include <span>

namespace apm {

/// Cohort second-moment matrix V̂_c, T x T, supported on T_c x T_c.
struct CohortSecondMoment {
  Matrix v;
  int cohort = 0;
  IndexSet observed;
  double effective_n = 0.0;
};

enum class FactorMethod { PC, HeteroskedasticSplit };

/// Cohort-specific factor space estimate.
struct CohortFactorEstimate {
  Matrix basis;     // T x r, orthonormal columns, zero outside T_c
  Vector spectrum;  // all T eigenvalues of V̂_c, ascending
  FactorMethod method = FactorMethod::PC;
  int cohort = 0;
  IndexSet observed;
};

/// Uncentered second moments of the cohort's observed outcomes.
///
/// With `weights` (length N, nonnegative, summing to one) the average is
/// weighted and renormalised over the cohort's members; weight on other
/// cohorts is ignored. An empty span means uniform weights.
CohortSecondMoment second_moment(const Panel& panel, const CohortIndex& index, int cohort,
                                 std::span<const double> weights = {});

/// Principal-components estimate: eigenvectors of the r largest
/// eigenvalues of V̂_c, computed on the dense T_c block.
CohortFactorEstimate pc_factors(const CohortSecondMoment& m, int r);

/// Split-spectral estimate robust to outcome-specific noise variances.
///
/// Uses r + 1 holdout windows of r consecutive observed outcomes. For each
/// holdout H the off-diagonal block V̂[T_c \ H, H] carries no noise, so its
/// top-r left singular vectors span the factor rows of T_c \ H. The
/// per-window projections are stitched by the null space of
/// Σ_j (E_{T_c \ H_j} - Π_j). Requires |T_c| >= 2r + 1.
CohortFactorEstimate hetero_split_factors(const CohortSecondMoment& m, int r);

std::string_view to_string(FactorMethod method) noexcept;

}  // namespace apm
