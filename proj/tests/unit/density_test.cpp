#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "graphprior/density.hpp"
#include "graphprior/prior_table.hpp"

using namespace graphprior;

namespace {

Graph edges(int n, std::vector<std::pair<int, int>> e) { return Graph::from_edges(n, e); }

// Oracle: walk every ordered tuple of distinct host nodes.
DensityRatio brute(const Graph& g, const Graph& h) {
  const int k = g.nodes(), n = h.nodes();
  DensityRatio r{0, 0};
  if (k > n) return DensityRatio{0, 1};
  std::vector<int> map(static_cast<std::size_t>(k));
  std::vector<bool> used(static_cast<std::size_t>(n));
  std::function<void(int)> rec = [&](int i) {
    if (i == k) {
      ++r.maps;
      for (auto [a, b] : g.edges())
        if (!h.has_edge(map[a], map[b])) return;
      ++r.count;
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (used[v]) continue;
      used[v] = true;
      map[i] = v;
      rec(i + 1);
      used[v] = false;
    }
  };
  rec(0);
  return r;
}

Graph random_graph(int n, std::mt19937_64& rng, double p) {
  std::bernoulli_distribution coin(p);
  Graph g(n);
  for (int s = 0; s < g.slots(); ++s) g.set_slot(s, coin(rng));
  return g;
}

}  // namespace

TEST(InjectiveDensity, Examples) {
  const Graph edge = edges(2, {{0, 1}});
  const Graph cherry = edges(3, {{0, 1}, {1, 2}});
  EXPECT_DOUBLE_EQ(injective_density(edge, Graph::complete(3)), 1.0);
  const auto d = injective_count(cherry, edges(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(d.count, 2u);
  EXPECT_EQ(d.maps, 6u);
  EXPECT_DOUBLE_EQ(d.value(), 1.0 / 3.0);
}

TEST(InjectiveDensity, PatternLargerThanHostIsZero) {
  EXPECT_EQ(injective_density(Graph::complete(4), Graph::complete(3)), 0.0);
}

TEST(InjectiveDensity, CompleteAndEmptyHosts) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 40; ++rep) {
    Graph g = random_graph(2 + static_cast<int>(rng() % 4), rng, 0.6);
    if (g.edge_count() == 0) g.set_slot(0, true);
    EXPECT_EQ(injective_density(g, Graph::complete(7)), 1.0);
    EXPECT_EQ(injective_density(g, Graph(7)), 0.0);
  }
}

TEST(InjectiveDensity, MatchesBruteForceOracle) {
  std::mt19937_64 rng(7);
  int tested = 0;
  while (tested < 300) {
    const int k = 2 + static_cast<int>(rng() % 5);
    Graph g = random_graph(k, rng, 0.5);
    if (g.edge_count() == 0 || g.edge_count() > 4) continue;
    const Graph h = random_graph(1 + static_cast<int>(rng() % 6), rng, 0.55);
    const auto fast = injective_count(g, h);
    const auto slow = brute(g, h);
    if (k <= h.nodes()) {
      EXPECT_EQ(fast.count, slow.count);
      EXPECT_EQ(fast.maps, slow.maps);
    } else {
      EXPECT_EQ(fast.count, 0u);
    }
    ++tested;
  }
}

TEST(InjectiveDensity, TriangleExpectationUnderErdosRenyi) {
  const Graph tri = edges(3, {{0, 1}, {1, 2}, {0, 2}});
  for (int n : {3, 5, 6}) {
    for (double rho : {0.2, 0.5, 0.9}) {
      const PriorTable p = PriorTable::erdos_renyi(n, rho);
      double e = 0.0;
      for (std::size_t c = 0; c < p.size(); ++c) e += p.prob(c) * injective_density(tri, p.classes()[c].graph);
      EXPECT_NEAR(e, rho * rho * rho, 1e-12);
    }
  }
}

TEST(FeatureTable, RowsMatchDirectCounts) {
  std::mt19937_64 rng(13);
  for (int n : {4, 6, 8}) {
    const auto basis = enumerate_basis(3, n);
    const auto table = feature_table(n, basis);
    for (int rep = 0; rep < 30; ++rep) {
      const Graph g = random_graph(n, rng, 0.5);
      const auto row = table->row(g);
      ASSERT_EQ(row.size(), basis.size());
      for (std::size_t i = 0; i < basis.size(); ++i) EXPECT_EQ(row[i], injective_density(basis.graph(i), g));
    }
  }
}
