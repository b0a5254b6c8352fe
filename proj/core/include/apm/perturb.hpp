#pragma once

#include "apm/linalg.hpp"

namespace apm {

/// Coefficient convention in the first-order eigenspace expansion.
/// `Validated` uses 1/(λ_j - λ_k) for j inside the window, which matches
/// exact small-matrix eigendecompositions; `Printed` flips it.
enum class SignConvention { Validated, Printed };

/// Eigen-window (s, r) of a symmetric d x d matrix: eigen-pairs s+1..s+r in
/// ascending order (1-based), i.e. columns s..s+r-1.
struct EigenWindow {
  int s = 0;
  int r = 1;
  Vector eigenvalues;   // ascending, length d
  Matrix eigenvectors;  // d x d orthonormal

  static EigenWindow of(const Matrix& m, int s, int r);

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  bool contains(int k) const { return k >= s && k < s + r; }
  /// Projection onto the window's eigenspace.
  Matrix projection() const;
};

/// Δ = min{λ_{s+1} - λ_s, λ_{s+r+1} - λ_{s+r}} / 4 with λ_0 = -inf and
/// λ_{d+1} = +inf. Non-positive when the window is not separated.
double window_gap(const Vector& ascending, int s, int r);

/// Σ_{j in window} Σ_{k outside} c_jk [Π(u_j) ΔM Π(u_k) + Π(u_k) ΔM Π(u_j)].
Matrix first_order_term(const EigenWindow& window, const Matrix& delta,
                        SignConvention convention = SignConvention::Validated);

struct BoundCheck {
  double approx_error = 0.0;
  double bound = 0.0;
  bool holds = true;
};

/// Compares the first-order remainder against 2 / (π Δ(M)^2) ||M̂ - M||²_op.
/// Throws OutsideNeighborhood when ||M̂ - M||_op > Δ(M).
BoundCheck check_bound(const Matrix& m, const Matrix& m_hat, int s, int r,
                       SignConvention convention = SignConvention::Validated);

}  // namespace apm
