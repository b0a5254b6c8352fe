#include "apm/graph.hpp"

#include "apm/error.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace apm {

UnionFind::UnionFind(int n) : parent_(n), size_(n, 1), components_(n) {
  std::iota(parent_.begin(), parent_.end(), 0);
}

int UnionFind::find(int x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  --components_;
  return true;
}

std::vector<OverlapEdge> OverlapGraph::edges() const {
  std::vector<OverlapEdge> out;
  for (int a = 0; a < n_cohorts; ++a) {
    for (int b = a + 1; b < n_cohorts; ++b) {
      if (adjacency(a, b)) out.push_back({a, b, overlap(a, b)});
    }
  }
  return out;
}

std::vector<int> OverlapGraph::neighbours(int node) const {
  std::vector<int> out;
  for (int b = 0; b < n_cohorts; ++b) {
    if (adjacency(node, b)) out.push_back(b);
  }
  return out;
}

namespace {

OverlapGraph overlap_counts(const CohortIndex& index, int r) {
  if (r < 1 || r >= index.n_outcomes) {
    throw Error(ErrorCode::BadRank, "rank " + std::to_string(r) + " must satisfy 1 <= r < T = " +
                                        std::to_string(index.n_outcomes));
  }
  OverlapGraph g;
  g.n_cohorts = index.n_cohorts();
  g.rank = r;
  g.overlap = Eigen::MatrixXi::Zero(g.n_cohorts, g.n_cohorts);
  g.adjacency.setConstant(g.n_cohorts, g.n_cohorts, false);
  for (int a = 0; a < g.n_cohorts; ++a) {
    for (int b = a + 1; b < g.n_cohorts; ++b) {
      const auto shared = set_intersection(index.cohorts[a].observed, index.cohorts[b].observed);
      g.overlap(a, b) = g.overlap(b, a) = static_cast<int>(shared.size());
    }
  }
  return g;
}

}  // namespace

OverlapGraph build_overlap_graph(const CohortIndex& index, int r) {
  OverlapGraph g = overlap_counts(index, r);
  for (int a = 0; a < g.n_cohorts; ++a) {
    for (int b = a + 1; b < g.n_cohorts; ++b) {
      g.adjacency(a, b) = g.adjacency(b, a) = g.overlap(a, b) >= r;
    }
  }
  return g;
}

OverlapGraph build_overlap_graph(const CohortIndex& index, int r, const Matrix& factor_basis,
                                 double rank_tol) {
  if (factor_basis.rows() != index.n_outcomes) {
    throw Error(ErrorCode::DimensionMismatch, "factor basis must have T rows");
  }
  OverlapGraph g = overlap_counts(index, r);
  g.basis_checked = true;
  g.rank_tol = rank_tol;
  for (int a = 0; a < g.n_cohorts; ++a) {
    for (int b = a + 1; b < g.n_cohorts; ++b) {
      if (g.overlap(a, b) < r) continue;
      const auto shared = set_intersection(index.cohorts[a].observed, index.cohorts[b].observed);
      Matrix rows(shared.size(), factor_basis.cols());
      for (std::size_t k = 0; k < shared.size(); ++k) rows.row(k) = factor_basis.row(shared[k]);
      const bool edge = numerical_rank(rows, rank_tol) >= r;
      g.adjacency(a, b) = g.adjacency(b, a) = edge;
    }
  }
  return g;
}

Components connected_components(const OverlapGraph& g) {
  UnionFind uf(g.n_cohorts);
  for (int a = 0; a < g.n_cohorts; ++a) {
    for (int b = a + 1; b < g.n_cohorts; ++b) {
      if (g.adjacency(a, b)) uf.unite(a, b);
    }
  }
  Components out;
  out.label.assign(g.n_cohorts, -1);
  std::vector<int> root_label(g.n_cohorts, -1);
  // Nodes are visited in increasing order, so the first node seen in a set
  // is its smallest member.
  for (int v = 0; v < g.n_cohorts; ++v) {
    const int root = uf.find(v);
    if (root_label[root] < 0) {
      root_label[root] = v;
      out.groups.emplace_back();
    }
    out.label[v] = root_label[root];
  }
  std::vector<int> group_of_label(g.n_cohorts, -1);
  int next = 0;
  for (int v = 0; v < g.n_cohorts; ++v) {
    if (out.label[v] == v) group_of_label[v] = next++;
    out.groups[group_of_label[out.label[v]]].push_back(v);
  }
  return out;
}

std::vector<IndexSet> reach_profile(const OverlapGraph& g, const CohortIndex& index, int start) {
  if (start < 0 || start >= g.n_cohorts) {
    throw Error(ErrorCode::InvalidArgument, "start cohort out of range");
  }
  std::vector<int> depth(g.n_cohorts, -1);
  std::queue<int> frontier;
  depth[start] = 0;
  frontier.push(start);
  int max_depth = 0;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : g.neighbours(v)) {
      if (depth[w] >= 0) continue;
      depth[w] = depth[v] + 1;
      max_depth = std::max(max_depth, depth[w]);
      frontier.push(w);
    }
  }

  std::vector<IndexSet> profile(max_depth + 1);
  std::vector<char> covered(index.n_outcomes, 0);
  for (int d = 0; d <= max_depth; ++d) {
    for (int v = 0; v < g.n_cohorts; ++v) {
      if (depth[v] != d) continue;
      for (int t : index.cohorts[v].observed) covered[t] = 1;
    }
    for (int t = 0; t < index.n_outcomes; ++t) {
      if (covered[t]) profile[d].push_back(t);
    }
  }
  return profile;
}

EquivalenceReport equivalence_graphs(const CohortIndex& index) {
  const int t = index.n_outcomes;
  EquivalenceReport report;

  // Units of one cohort share their neighbourhood, so a cohort node stands
  // in for its members; cohorts are nonempty by construction.
  UnionFind bipartite(t + index.n_cohorts());
  for (int c = 0; c < index.n_cohorts(); ++c) {
    for (int k : index.cohorts[c].observed) bipartite.unite(t + c, k);
  }
  report.bipartite_connected = bipartite.components() == 1;

  UnionFind check(t);
  for (const auto& cohort : index.cohorts) {
    for (std::size_t k = 1; k < cohort.observed.size(); ++k) {
      check.unite(cohort.observed[0], cohort.observed[k]);
    }
  }
  report.check_connected = check.components() == 1;
  return report;
}

}  // namespace apm
