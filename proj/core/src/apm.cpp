#include "apm/apm.hpp"

#include "apm/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace apm {

Matrix projector(const Matrix& m) {
  const auto t = m.rows();
  if (m.cols() == 0 || m.size() == 0) return Matrix::Zero(t, t);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) return Matrix::Zero(t, t);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > kPinvCutoff * sv(0)) ++rank;
  const Matrix u = svd.matrixU().leftCols(rank);
  return u * u.transpose();
}

double AggregatedProjection::eigengap(int r) const {
  if (r < 0) return 0.0;
  if (r >= spectrum.size()) return std::numeric_limits<double>::infinity();
  return spectrum(r);
}

AggregatedProjection build_apm(std::span<const CohortProjection> cohorts, int n_outcomes) {
  if (cohorts.empty()) throw Error(ErrorCode::InvalidArgument, "APM needs at least one cohort");
  AggregatedProjection out;
  out.matrix = Matrix::Zero(n_outcomes, n_outcomes);
  for (const auto& c : cohorts) {
    if (c.projection.rows() != n_outcomes || c.projection.cols() != n_outcomes) {
      throw Error(ErrorCode::DimensionMismatch,
                  "cohort " + std::to_string(c.cohort) + " projection is not T x T");
    }
    for (int k : c.observed) {
      if (k < 0 || k >= n_outcomes) {
        throw Error(ErrorCode::DimensionMismatch, "observed index out of range");
      }
      out.matrix(k, k) += 1.0;
    }
    out.matrix -= c.projection;
    out.contributing_cohorts.push_back(c.cohort);
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose());
  SymEigen eig = sym_eigen(out.matrix);
  out.spectrum = std::move(eig.values);
  out.eigenvectors = std::move(eig.vectors);
  return out;
}

FactorBasis null_basis(const AggregatedProjection& apm, int r, std::optional<double> gap_floor) {
  const int t = apm.dim();
  if (r < 1 || r >= t) {
    throw Error(ErrorCode::BadRank, "null_basis needs 1 <= r < T");
  }
  FactorBasis out;
  out.gamma = apm.eigenvectors.leftCols(r);
  fix_signs(out.gamma);
  out.eigengap = apm.eigengap(r);
  const double lambda_max = std::max(0.0, apm.spectrum(t - 1));
  out.gap_floor = gap_floor.value_or(kDefaultGapFloorRel * lambda_max);

  const double lambda_r = apm.spectrum(r - 1);
  std::ostringstream msg;
  if (out.eigengap <= out.gap_floor) {
    out.weak_identification = true;
    msg << "weak identification: eigengap " << out.eigengap << " <= floor " << out.gap_floor
        << " (null space may exceed r = " << r << ")";
    out.warnings.push_back(msg.str());
    msg.str("");
  }
  // Sampling noise lifts λ_r off zero, so only a λ_r comparable to λ_{r+1}
  // signals a null space smaller than r.
  if (lambda_r > out.gap_floor && lambda_r > 0.1 * out.eigengap) {
    out.rank_mismatch = true;
    msg << "lambda_r = " << lambda_r << " is not separated from lambda_{r+1} = " << out.eigengap
        << "; r = " << r << " may be too large";
    out.warnings.push_back(msg.str());
  }
  return out;
}

}  // namespace apm
