#include "apm/graph.hpp"
#include "unit/common.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <set>

namespace apm {
namespace {

using testing::code_of;
using testing::index_from_sets;

TEST(OverlapGraph, StaircaseIsAChain) {
  const CohortIndex idx = index_from_sets({{0, 1}, {1, 2}, {2, 3}}, 4);
  const OverlapGraph g = build_overlap_graph(idx, 1);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_FALSE(g.has_edge(0, 2));
  const auto edges = g.edges();
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_EQ(edges[0].overlap, 1);
  EXPECT_EQ(connected_components(g).count(), 1);
}

TEST(OverlapGraph, DisjointSupportsHaveNoEdges) {
  const CohortIndex idx = index_from_sets({{0, 1}, {2, 3}}, 4);
  const OverlapGraph g = build_overlap_graph(idx, 1);
  EXPECT_TRUE(g.edges().empty());
  EXPECT_EQ(connected_components(g).count(), 2);
}

TEST(OverlapGraph, BasisAwareRuleDropsRankDeficientOverlap) {
  const CohortIndex idx = index_from_sets({{0, 1, 2}, {1, 2, 3}}, 4);
  Matrix basis(4, 2);
  basis << 0.3, 1.0,
           1.0, 0.0,
           1.0, 0.0,
           0.2, 0.7;
  // Overlap rows {1, 2} are both (1, 0): singular values (√2, 0).
  EXPECT_TRUE(build_overlap_graph(idx, 2).has_edge(0, 1));
  EXPECT_FALSE(build_overlap_graph(idx, 2, basis).has_edge(0, 1));
  basis(2, 1) = 0.5;
  EXPECT_TRUE(build_overlap_graph(idx, 2, basis).has_edge(0, 1));
}

TEST(OverlapGraph, RankMustBeBelowT) {
  const CohortIndex idx = index_from_sets({{0, 1}}, 2);
  EXPECT_EQ(code_of([&] { build_overlap_graph(idx, 2); }), ErrorCode::BadRank);
  EXPECT_EQ(code_of([&] { build_overlap_graph(idx, 0); }), ErrorCode::BadRank);
}

TEST(Components, Basics) {
  const auto chain = connected_components(
      build_overlap_graph(index_from_sets({{0, 1}, {1, 2}, {2, 3}}, 4), 1));
  EXPECT_EQ(chain.count(), 1);

  const auto pairs = connected_components(
      build_overlap_graph(index_from_sets({{0, 1}, {2, 3}, {0, 4}, {3, 5}}, 6), 1));
  ASSERT_EQ(pairs.count(), 2);
  EXPECT_EQ(pairs.groups[0], (std::vector<int>{0, 2}));
  EXPECT_EQ(pairs.groups[1], (std::vector<int>{1, 3}));
  EXPECT_EQ(pairs.label, (std::vector<int>{0, 1, 0, 1}));

  const auto singles = connected_components(
      build_overlap_graph(index_from_sets({{0}, {1}, {2}, {3}}, 5), 1));
  EXPECT_EQ(singles.count(), 4);
  EXPECT_EQ(singles.label, (std::vector<int>{0, 1, 2, 3}));
}

TEST(ReachProfile, StaircaseGrowsOneOutcomePerHop) {
  const CohortIndex idx = index_from_sets({{0, 1}, {1, 2}, {2, 3}}, 4);
  const auto profile = reach_profile(build_overlap_graph(idx, 1), idx, 0);
  ASSERT_EQ(profile.size(), 3u);
  EXPECT_EQ(profile[0], (IndexSet{0, 1}));
  EXPECT_EQ(profile[1], (IndexSet{0, 1, 2}));
  EXPECT_EQ(profile[2], (IndexSet{0, 1, 2, 3}));
}

TEST(ReachProfile, CompleteGraphCoversAtDepthOne) {
  const CohortIndex idx = index_from_sets({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 5);
  const OverlapGraph g = build_overlap_graph(idx, 1);
  ASSERT_EQ(g.edges().size(), 6u);
  const auto profile = reach_profile(g, idx, 1);
  ASSERT_EQ(profile.size(), 2u);
  EXPECT_EQ(profile[1], (IndexSet{0, 1, 2, 3, 4}));
}

TEST(ReachProfile, IsolatedCohortSeesOnlyItself) {
  const CohortIndex idx = index_from_sets({{0, 1}, {2, 3}}, 4);
  const auto profile = reach_profile(build_overlap_graph(idx, 1), idx, 1);
  ASSERT_EQ(profile.size(), 1u);
  EXPECT_EQ(profile[0], (IndexSet{2, 3}));
}

TEST(Equivalence, SmallCases) {
  auto check = [](const std::vector<IndexSet>& sets, int t, bool expected) {
    const CohortIndex idx = index_from_sets(sets, t, 2);
    const EquivalenceReport rep = equivalence_graphs(idx);
    EXPECT_EQ(rep.bipartite_connected, expected);
    EXPECT_EQ(rep.check_connected, expected);
    EXPECT_EQ(connected_components(build_overlap_graph(idx, 1)).count() == 1, expected);
  };
  check({{0, 1}, {1, 2}}, 3, true);
  check({{0}, {1}}, 2, false);
  check({{0, 1, 2}}, 3, true);
}

// Random instance with nonempty cohorts and every outcome covered.
std::vector<IndexSet> random_sets(std::mt19937_64& rng, int t, int c, double density) {
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<int> any(0, t - 1);
  std::set<IndexSet> unique;
  while (true) {
    unique.clear();
    for (int k = 0; k < c; ++k) {
      IndexSet s;
      for (int o = 0; o < t; ++o) {
        if (keep(rng)) s.push_back(o);
      }
      if (s.empty()) s.push_back(any(rng));
      unique.insert(s);
    }
    std::vector<char> covered(t, 0);
    for (const auto& s : unique) {
      for (int o : s) covered[o] = 1;
    }
    if (std::count(covered.begin(), covered.end(), 1) == t) break;
  }
  return {unique.begin(), unique.end()};
}

// Plain BFS over units and outcomes, one edge per observed cell.
bool bipartite_bfs(const CohortIndex& idx) {
  const int t = idx.n_outcomes;
  const int n = idx.n_units;
  std::vector<std::vector<int>> adj(n + t);
  for (const auto& c : idx.cohorts) {
    for (int i : c.members) {
      for (int o : c.observed) {
        adj[i].push_back(n + o);
        adj[n + o].push_back(i);
      }
    }
  }
  std::vector<char> seen(n + t, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        q.push(w);
      }
    }
  }
  return count == n + t;
}

TEST(Equivalence, RandomInstancesAgreeWithBruteForce) {
  std::mt19937_64 rng(2024);
  int connected = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int t = 2 + rep % 9;
    const int c = 1 + rep % 6;
    const CohortIndex idx = index_from_sets(random_sets(rng, t, c, 0.3), t, 2);
    const EquivalenceReport eq = equivalence_graphs(idx);
    const bool overlap = connected_components(build_overlap_graph(idx, 1)).count() == 1;
    const bool brute = bipartite_bfs(idx);
    EXPECT_EQ(eq.bipartite_connected, brute);
    EXPECT_EQ(eq.check_connected, brute);
    EXPECT_EQ(overlap, brute);
    connected += brute;
  }
  // Both outcomes must be exercised.
  EXPECT_GT(connected, 20);
  EXPECT_LT(connected, 180);
}

TEST(OverlapGraph, RaisingRankNeverAddsEdges) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const int t = 6;
    const CohortIndex idx = index_from_sets(random_sets(rng, t, 5, 0.6), t);
    for (int r = 1; r + 1 < t; ++r) {
      const OverlapGraph lo = build_overlap_graph(idx, r);
      const OverlapGraph hi = build_overlap_graph(idx, r + 1);
      for (int a = 0; a < idx.n_cohorts(); ++a) {
        EXPECT_FALSE(hi.has_edge(a, a));
        for (int b = 0; b < idx.n_cohorts(); ++b) {
          if (hi.has_edge(a, b)) EXPECT_TRUE(lo.has_edge(a, b));
          EXPECT_EQ(lo.has_edge(a, b), lo.has_edge(b, a));
          if (lo.has_edge(a, b)) EXPECT_GE(lo.overlap(a, b), r);
        }
      }
    }
  }
}

TEST(Components, ArePartitions) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const CohortIndex idx = index_from_sets(random_sets(rng, 7, 6, 0.25), 7);
    const Components comps = connected_components(build_overlap_graph(idx, 1));
    std::vector<int> seen(idx.n_cohorts(), 0);
    for (const auto& g : comps.groups) {
      for (int v : g) {
        ++seen[v];
        EXPECT_EQ(comps.label[v], g.front());
      }
    }
    for (int s : seen) EXPECT_EQ(s, 1);
  }
}

TEST(UnionFind, CountsComponents) {
  UnionFind uf(5);
  EXPECT_EQ(uf.components(), 5);
  EXPECT_TRUE(uf.unite(0, 1));
  EXPECT_FALSE(uf.unite(1, 0));
  uf.unite(3, 4);
  EXPECT_EQ(uf.components(), 3);
  EXPECT_EQ(uf.find(0), uf.find(1));
  EXPECT_NE(uf.find(0), uf.find(3));
}

}  // namespace
}  // namespace apm
