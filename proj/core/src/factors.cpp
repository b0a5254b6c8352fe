#include "apm/factors.hpp"

#include "apm/apm.hpp"
#include "apm/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace apm {

namespace {

void check_weights(std::span<const double> weights, int n) {
  if (static_cast<int>(weights.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "weights must have one entry per unit");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
    }
    sum += w;
  }
  const double tol = 1e-12 + 4.0 * std::numeric_limits<double>::epsilon() * n;
  if (std::abs(sum - 1.0) > tol) {
    throw Error(ErrorCode::InvalidArgument, "weights must sum to one");
  }
}

// True when every member carries the same positive weight; the weighted
// average then coincides with the plain one and takes the same code path.
bool uniform_on(std::span<const double> weights, const std::vector<int>& members) {
  const double w0 = weights[members.front()];
  return w0 > 0.0 && std::all_of(members.begin(), members.end(),
                                 [&](int i) { return weights[i] == w0; });
}

Matrix gather(const Panel& panel, const Cohort& cohort) {
  Matrix y(cohort.members.size(), cohort.observed.size());
  for (std::size_t a = 0; a < cohort.members.size(); ++a) {
    for (std::size_t b = 0; b < cohort.observed.size(); ++b) {
      y(a, b) = panel.values()(cohort.members[a], cohort.observed[b]);
    }
  }
  return y;
}

Vector full_spectrum(const Vector& block_values, int t) {
  Vector out = Vector::Zero(t);
  const auto k = block_values.size();
  out.tail(k) = block_values;
  std::sort(out.data(), out.data() + out.size());
  return out;
}

}  // namespace

std::string_view to_string(FactorMethod method) noexcept {
  return method == FactorMethod::PC ? "pc" : "hetero-split";
}

CohortSecondMoment second_moment(const Panel& panel, const CohortIndex& index, int cohort,
                                 std::span<const double> weights) {
  if (cohort < 0 || cohort >= index.n_cohorts()) {
    throw Error(ErrorCode::InvalidArgument, "cohort out of range");
  }
  const Cohort& c = index.cohorts[cohort];
  if (c.members.empty()) throw Error(ErrorCode::EmptyCohort, "cohort has no members");

  CohortSecondMoment out;
  out.cohort = cohort;
  out.observed = c.observed;
  const Matrix y = gather(panel, c);
  Matrix block;
  if (!weights.empty()) check_weights(weights, panel.n_units());
  if (weights.empty() || uniform_on(weights, c.members)) {
    block = (y.transpose() * y) / static_cast<double>(c.size());
    out.effective_n = weights.empty() ? c.size()
                                      : weights[c.members.front()] * c.size() * panel.n_units();
  } else {
    Vector w(c.size());
    for (int a = 0; a < c.size(); ++a) w(a) = weights[c.members[a]];
    const double mass = w.sum();
    if (!(mass > 0.0)) {
      throw Error(ErrorCode::ZeroCohortWeight, "cohort " + std::to_string(cohort));
    }
    block = (y.transpose() * (w.asDiagonal() * y)) / mass;
    out.effective_n = mass * panel.n_units();
  }
  out.v = Matrix::Zero(index.n_outcomes, index.n_outcomes);
  for (std::size_t a = 0; a < c.observed.size(); ++a) {
    for (std::size_t b = 0; b < c.observed.size(); ++b) {
      out.v(c.observed[a], c.observed[b]) = block(a, b);
    }
  }
  return out;
}

CohortFactorEstimate pc_factors(const CohortSecondMoment& m, int r) {
  const int k = static_cast<int>(m.observed.size());
  if (r < 1 || r > k) {
    throw Error(ErrorCode::RankExceedsObserved,
                "rank " + std::to_string(r) + " exceeds |T_c| = " + std::to_string(k));
  }
  const int t = static_cast<int>(m.v.rows());
  const SymEigen eig = sym_eigen(submatrix(m.v, m.observed, m.observed));

  Matrix top(k, r);
  for (int j = 0; j < r; ++j) top.col(j) = eig.vectors.col(k - 1 - j);
  Matrix basis = embed_rows(top, m.observed, t);
  fix_signs(basis);
  return {std::move(basis), full_spectrum(eig.values, t), FactorMethod::PC, m.cohort, m.observed};
}

CohortFactorEstimate hetero_split_factors(const CohortSecondMoment& m, int r) {
  const int k = static_cast<int>(m.observed.size());
  if (r < 1 || k < 2 * r + 1) {
    throw Error(ErrorCode::TooFewOutcomes, "need |T_c| >= 2r + 1, have |T_c| = " +
                                               std::to_string(k) + ", r = " + std::to_string(r));
  }
  const int t = static_cast<int>(m.v.rows());

  // Windows j = 0..r of r consecutive positions; consecutive windows swap
  // one outcome and the first and last are disjoint, so the complements
  // cover T_c and consecutive complements share k - r - 1 >= r outcomes.
  Matrix stitched = Matrix::Zero(t, t);
  for (int j = 0; j <= r; ++j) {
    const IndexSet holdout(m.observed.begin() + j, m.observed.begin() + j + r);
    const IndexSet rest = set_difference(m.observed, holdout);
    const Matrix cross = submatrix(m.v, rest, holdout);
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU);
    const Matrix left = embed_rows(svd.matrixU().leftCols(r), rest, t);
    stitched += selector(rest, t) - left * left.transpose();
  }

  const SymEigen eig = sym_eigen(submatrix(stitched, m.observed, m.observed));
  Matrix basis = embed_rows(eig.vectors.leftCols(r), m.observed, t);
  fix_signs(basis);
  const Vector v_spectrum = sym_eigen(submatrix(m.v, m.observed, m.observed)).values;
  return {std::move(basis), full_spectrum(v_spectrum, t), FactorMethod::HeteroskedasticSplit,
          m.cohort, m.observed};
}

}  // namespace apm
