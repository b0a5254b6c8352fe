#pragma once

#include "apm/linalg.hpp"
#include "apm/panel.hpp"

#include <Eigen/Core>

#include <vector>

namespace apm {

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(int n);
  int find(int x);
  bool unite(int a, int b);
  int components() const { return components_; }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  int components_;
};

struct OverlapEdge {
  int a = 0;
  int b = 0;
  int overlap = 0;
};

/// Observed-outcome overlap graph over cohorts for a factor rank r.
struct OverlapGraph {
  int n_cohorts = 0;
  int rank = 1;
  Eigen::MatrixXi overlap;  // |T_a ∩ T_b|, zero diagonal
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
  bool basis_checked = false;
  double rank_tol = 0.0;

  bool has_edge(int a, int b) const { return adjacency(a, b); }
  std::vector<OverlapEdge> edges() const;
  std::vector<int> neighbours(int node) const;
};

constexpr double kDefaultRankTol = 1e-8;

/// Overlap-count rule: an edge joins distinct cohorts sharing at least r
/// observed outcomes. Sufficient only when the factor rows are in general
/// position.
OverlapGraph build_overlap_graph(const CohortIndex& index, int r);

/// Basis-aware rule: an edge requires the overlap rows of `factor_basis`
/// to have numerical rank r.
OverlapGraph build_overlap_graph(const CohortIndex& index, int r, const Matrix& factor_basis,
                                 double rank_tol = kDefaultRankTol);

struct Components {
  std::vector<int> label;               // per node, smallest member index
  std::vector<std::vector<int>> groups; // ordered by label
  int count() const { return static_cast<int>(groups.size()); }
};

Components connected_components(const OverlapGraph& g);

/// Cumulative outcome coverage by BFS depth from `start`. Entry d holds
/// every outcome observed by some cohort within distance d.
std::vector<IndexSet> reach_profile(const OverlapGraph& g, const CohortIndex& index, int start);

struct EquivalenceReport {
  bool bipartite_connected = false;  // units + outcomes, one edge per observed cell
  bool check_connected = false;      // outcomes, edge if some cohort observes both
};

EquivalenceReport equivalence_graphs(const CohortIndex& index);

}  // namespace apm
