#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "graphprior/canonical.hpp"
#include "graphprior/error.hpp"

using namespace graphprior;

namespace {

Graph random_graph(int n, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution coin(p);
  Graph g(n);
  for (int s = 0; s < g.slots(); ++s) g.set_slot(s, coin(rng));
  return g;
}

// Brute-force oracle: smallest edge-bit value over all relabelings, and the
// number of distinct relabeled graphs.
std::pair<EdgeBits, std::uint64_t> brute_orbit(const Graph& g) {
  std::vector<int> p(static_cast<std::size_t>(g.nodes()));
  std::iota(p.begin(), p.end(), 0);
  std::set<EdgeBits> seen;
  do {
    seen.insert(g.relabeled(p).bits());
  } while (std::next_permutation(p.begin(), p.end()));
  return {*seen.begin(), seen.size()};
}

}  // namespace

TEST(CanonicalForm, PathRelabelingsAgree) {
  const auto a = canonical_form(Graph::from_edges(3, std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}));
  const auto b = canonical_form(Graph::from_edges(3, std::vector<std::pair<int, int>>{{1, 0}, {0, 2}}));
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.orbit_size, 3u);
}

TEST(CanonicalForm, SmallOrbits) {
  EXPECT_EQ(canonical_form(Graph::complete(3)).orbit_size, 1u);
  EXPECT_EQ(canonical_form(Graph::complete(3)).graph, Graph::complete(3));
  EXPECT_EQ(canonical_form(Graph::from_edges(3, std::vector<std::pair<int, int>>{{0, 2}})).orbit_size, 3u);
  EXPECT_EQ(canonical_form(Graph(6)).orbit_size, 1u);
}

TEST(CanonicalForm, InvariantUnderRandomRelabeling) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 8);
    const Graph g = random_graph(n, rng, 0.2 + 0.6 * (rng() % 100) / 100.0);
    const auto c = canonical_form(g);
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    EXPECT_EQ(canonical_form(g.relabeled(p)).graph, c.graph);
    EXPECT_EQ(canonical_form(c.graph).graph, c.graph);  // idempotent
    EXPECT_EQ(factorial(n) % c.orbit_size, 0u);
  }
}

TEST(CanonicalForm, OrbitSizeMatchesBruteForce) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 150; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const Graph g = random_graph(n, rng);
    EXPECT_EQ(canonical_form(g).orbit_size, brute_orbit(g).second) << g.to_string();
  }
}

TEST(CanonicalForm, SeparatesNonIsomorphicGraphs) {
  // Every labeled 5-node graph: classes by canonical form must equal classes
  // by the brute-force minimum relabeling.
  std::map<EdgeBits, EdgeBits> canon_to_brute;
  for (std::uint64_t b = 0; b < (1u << 10); ++b) {
    const Graph g(5, EdgeBits{b});
    const EdgeBits c = canonical_form(g).graph.bits();
    const EdgeBits m = brute_orbit(g).first;
    auto [it, fresh] = canon_to_brute.emplace(c, m);
    if (!fresh) EXPECT_EQ(it->second, m);
  }
  EXPECT_EQ(canon_to_brute.size(), 34u);
}

TEST(Enumerate, CountsAndOrbitSums) {
  const std::vector<std::size_t> counts = {1, 2, 4, 11, 34, 156, 1044, 12346};
  for (int n = 1; n <= 8; ++n) {
    const auto classes = enumerate_nonisomorphic(n);
    EXPECT_EQ(classes.size(), counts[static_cast<std::size_t>(n - 1)]) << "n=" << n;
    unsigned __int128 sum = 0;
    for (const auto& c : classes) sum += c.orbit_size;
    EXPECT_TRUE(sum == (static_cast<unsigned __int128>(1) << relation_count(n))) << "n=" << n;
    for (std::size_t i = 1; i < classes.size(); ++i) {
      const auto& a = classes[i - 1].graph;
      const auto& b = classes[i].graph;
      EXPECT_TRUE(a.edge_count() < b.edge_count() || (a.edge_count() == b.edge_count() && a.bits() < b.bits()));
    }
  }
  EXPECT_THROW(enumerate_nonisomorphic(9), CapabilityError);
}

TEST(ClassIndex, LookupMatchesCanonicalForm) {
  std::mt19937_64 rng(29);
  for (int n = 3; n <= 8; ++n) {
    const auto index = ClassIndex::get(n);
    for (int rep = 0; rep < 200; ++rep) {
      const Graph g = random_graph(n, rng);
      const std::size_t c = index->index_of(g);
      EXPECT_EQ((*index)[c].graph, canonical_form(g).graph);
    }
  }
  EXPECT_THROW(ClassIndex::get(9), CapabilityError);
}

TEST(Basis, Examples) {
  const auto r1 = enumerate_basis(1, 6);
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_EQ(r1.name(0), "edge");
  const auto r2 = enumerate_basis(2, 4);
  ASSERT_EQ(r2.size(), 3u);
  EXPECT_EQ(r2.name(0), "edge");
  EXPECT_EQ(r2.name(1), "cherry");
  EXPECT_EQ(r2.name(2), "two_edges");
  const auto r2n3 = enumerate_basis(2, 3);
  ASSERT_EQ(r2n3.size(), 2u);
  EXPECT_EQ(r2n3.name(1), "cherry");
}

TEST(Basis, ElementsAreDistinctAndIsolateFree) {
  const auto basis = enumerate_basis(4, 6);
  std::set<Graph> seen;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Graph& g = basis.graph(i);
    EXPECT_GE(g.edge_count(), 1);
    EXPECT_LE(g.edge_count(), 4);
    for (int d : g.degrees()) EXPECT_GT(d, 0);
    EXPECT_TRUE(seen.insert(canonical_form(g).graph).second);
    EXPECT_EQ(basis.find(g), std::optional<std::size_t>(i));
  }
  // Padding with isolated nodes maps these one-to-one onto 6-node classes
  // with 1..4 edges: 1 + 2 + 5 + 9 (two of the 11 four-edge classes need
  // 7 or 8 nodes).
  std::size_t six = 0;
  for (const auto& c : enumerate_nonisomorphic(6))
    if (c.graph.edge_count() >= 1 && c.graph.edge_count() <= 4) ++six;
  EXPECT_EQ(basis.size(), six);
  EXPECT_EQ(basis.size(), 17u);
}
