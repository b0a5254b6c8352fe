#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace apm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Outcome index set, sorted ascending, 0-based.
using IndexSet = std::vector<int>;

/// Diagonal 0/1 selector E_S as a dense T x T matrix.
Matrix selector(const IndexSet& observed, int t);

/// Ascending eigen-decomposition of a symmetric matrix.
struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns match `values`
};
SymEigen sym_eigen(const Matrix& m);

/// Makes the largest-magnitude entry of each column positive.
void fix_signs(Matrix& columns);

/// Operator (spectral) norm of a symmetric matrix.
double sym_op_norm(const Matrix& m);

/// Numerical rank: singular values above `rel_tol` times the largest.
int numerical_rank(const Matrix& m, double rel_tol);

/// Rows/columns of `m` restricted to `rows` x `cols`.
Matrix submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols);

/// Embeds a |rows| x k block into a zero T x k matrix.
Matrix embed_rows(const Matrix& block, const IndexSet& rows, int t);

IndexSet set_difference(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);

}  // namespace apm
