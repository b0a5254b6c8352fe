#pragma once

#include "apm/linalg.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apm {

/// Singular values below this fraction of the largest are treated as zero.
constexpr double kPinvCutoff = 1e-12;

/// Π(M) = M (M'M)^+ M', the orthogonal projector onto col(M).
Matrix projector(const Matrix& m);

/// One cohort's contribution E_c - Π̂_c.
struct CohortProjection {
  Matrix projection;  // Π̂_c, T x T
  IndexSet observed;  // T_c
  int cohort = 0;
};

/// Aggregated projection matrix Â = Σ_c (E_c - Π̂_c).
struct AggregatedProjection {
  Matrix matrix;
  Vector spectrum;      // ascending
  Matrix eigenvectors;  // columns match `spectrum`
  std::vector<int> contributing_cohorts;

  int dim() const { return static_cast<int>(matrix.rows()); }
  /// λ_{r+1}(Â), the gap above an r-dimensional null space.
  double eigengap(int r) const;
};

AggregatedProjection build_apm(std::span<const CohortProjection> cohorts, int n_outcomes);

struct FactorBasis {
  Matrix gamma;  // T x r, orthonormal columns
  double eigengap = 0.0;
  double gap_floor = 0.0;
  bool weak_identification = false;  // λ_{r+1} at or below the floor
  bool rank_mismatch = false;        // λ_r clearly above zero
  std::vector<std::string> warnings;
};

constexpr double kDefaultGapFloorRel = 1e-6;

/// Eigenvectors of the r smallest eigenvalues of Â. `gap_floor` defaults to
/// kDefaultGapFloorRel * λ_max(Â). Never throws on weak identification.
FactorBasis null_basis(const AggregatedProjection& apm, int r,
                       std::optional<double> gap_floor = std::nullopt);

}  // namespace apm
