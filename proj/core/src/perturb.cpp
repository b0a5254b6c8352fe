#include "apm/perturb.hpp"

#include "apm/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace apm {

EigenWindow EigenWindow::of(const Matrix& m, int s, int r) {
  const auto d = static_cast<int>(m.rows());
  if (m.cols() != d) throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
  if (s < 0 || r < 1 || s + r > d) {
    throw Error(ErrorCode::InvalidArgument, "eigen-window (" + std::to_string(s) + ", " +
                                                std::to_string(r) + ") invalid for d = " +
                                                std::to_string(d));
  }
  SymEigen eig = sym_eigen(m);
  return {s, r, std::move(eig.values), std::move(eig.vectors)};
}

Matrix EigenWindow::projection() const {
  if (r == dim()) return Matrix::Identity(dim(), dim());
  const auto u = eigenvectors.middleCols(s, r);
  return u * u.transpose();
}

double window_gap(const Vector& ascending, int s, int r) {
  const auto d = static_cast<int>(ascending.size());
  if (s < 0 || r < 1 || s + r > d) {
    throw Error(ErrorCode::InvalidArgument, "eigen-window out of range");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double below = s == 0 ? inf : ascending(s) - ascending(s - 1);
  const double above = s + r == d ? inf : ascending(s + r) - ascending(s + r - 1);
  // A window covering the whole spectrum has no finite gap; its projection
  // is the identity and never moves.
  return std::min(below, above) / 4.0;
}

Matrix first_order_term(const EigenWindow& window, const Matrix& delta,
                        SignConvention convention) {
  const int d = window.dim();
  if (delta.rows() != d || delta.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "perturbation has the wrong shape");
  }
  const int s = window.s;
  const int r = window.r;
  if (r == d) return Matrix::Zero(d, d);

  // Columns outside the window, in ascending order.
  Matrix outside(d, d - r);
  Vector outside_values(d - r);
  for (int k = 0, col = 0; k < d; ++k) {
    if (window.contains(k)) continue;
    outside.col(col) = window.eigenvectors.col(k);
    outside_values(col++) = window.eigenvalues(k);
  }
  const auto inside = window.eigenvectors.middleCols(s, r);
  Matrix coupling = inside.transpose() * delta * outside;  // u_j' ΔM u_k
  const double sign = convention == SignConvention::Validated ? 1.0 : -1.0;
  for (int j = 0; j < r; ++j) {
    for (int k = 0; k < d - r; ++k) {
      coupling(j, k) *= sign / (window.eigenvalues(s + j) - outside_values(k));
    }
  }
  const Matrix half = inside * coupling * outside.transpose();
  return half + half.transpose();
}

BoundCheck check_bound(const Matrix& m, const Matrix& m_hat, int s, int r,
                       SignConvention convention) {
  if (m.rows() != m_hat.rows() || m.cols() != m_hat.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "M and M_hat differ in shape");
  }
  const EigenWindow base = EigenWindow::of(m, s, r);
  const double gap = window_gap(base.eigenvalues, s, r);
  const Matrix delta = m_hat - m;
  const double size = sym_op_norm(delta);
  if (!(gap > 0.0)) {
    throw Error(ErrorCode::OutsideNeighborhood, "eigen-window is not separated (gap <= 0)");
  }
  if (size > gap) {
    throw Error(ErrorCode::OutsideNeighborhood,
                "||M_hat - M|| = " + std::to_string(size) + " exceeds gap " + std::to_string(gap));
  }
  BoundCheck out;
  if (size == 0.0) return out;
  const EigenWindow moved = EigenWindow::of(m_hat, s, r);
  const Matrix residual = moved.projection() - base.projection() -
                          first_order_term(base, delta, convention);
  out.approx_error = sym_op_norm(residual);
  out.bound = std::isinf(gap) ? 0.0 : 2.0 / (std::numbers::pi * gap * gap) * size * size;
  out.holds = out.approx_error <= out.bound || (std::isinf(gap) && out.approx_error < 1e-12);
  return out;
}

}  // namespace apm
