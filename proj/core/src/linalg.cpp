#include "apm/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iterator>

namespace apm {

Matrix selector(const IndexSet& observed, int t) {
  Matrix e = Matrix::Zero(t, t);
  for (int k : observed) e(k, k) = 1.0;
  return e;
}

SymEigen sym_eigen(const Matrix& m) {
  if (m.rows() == 0) return {Vector(0), Matrix(0, 0)};
  // Symmetrise so round-off asymmetry never leaks into the solver.
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

void fix_signs(Matrix& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index arg = 0;
    columns.col(j).cwiseAbs().maxCoeff(&arg);
    if (columns(arg, j) < 0.0) columns.col(j) *= -1.0;
  }
}

double sym_op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Vector ev = sym_eigen(m).values;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

int numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

Matrix submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

Matrix embed_rows(const Matrix& block, const IndexSet& rows, int t) {
  Matrix out = Matrix::Zero(t, block.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(rows[i]) = block.row(i);
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace apm
