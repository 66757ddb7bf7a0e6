#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphprior/graph.hpp"

namespace graphprior {

// A graph in canonical labeling together with the number of labeled graphs
// isomorphic to it (n! / |Aut|).
struct CanonicalGraph {
  Graph graph;
  std::uint64_t orbit_size = 1;

  friend bool operator==(const CanonicalGraph&, const CanonicalGraph&) = default;
};

// Isomorphic inputs yield bit-identical outputs. Cost is exponential only in
// the size of symmetric vertex classes that colour refinement cannot split;
// twins are collapsed, so empty and complete graphs are immediate.
CanonicalGraph canonical_form(const Graph& g);

// Same graph with degree-0 nodes removed (node count shrinks).
Graph drop_isolated(const Graph& g);

inline constexpr int kMaxEnumerableNodes = 8;

// All isomorphism classes on n nodes, with a fast graph -> class lookup.
// Instances are built once per n and shared.
class ClassIndex {
 public:
  static std::shared_ptr<const ClassIndex> get(int n);

  int nodes() const noexcept { return n_; }
  std::size_t size() const noexcept { return classes_.size(); }
  const std::vector<CanonicalGraph>& classes() const noexcept { return classes_; }
  const CanonicalGraph& operator[](std::size_t i) const { return classes_[i]; }

  std::size_t index_of(const Graph& g) const;
  // Only valid for n <= 7 (dense table over all labeled graphs).
  bool has_dense_table() const noexcept { return !dense_.empty(); }
  std::size_t index_of_bits(std::uint64_t bits) const noexcept { return dense_[bits]; }

  explicit ClassIndex(int n);

 private:
  int n_;
  std::vector<CanonicalGraph> classes_;
  std::unordered_map<EdgeBits, std::uint32_t> by_bits_;
  std::vector<std::uint16_t> dense_;
};

// Non-isomorphic graphs on n nodes sorted by (edge count, canonical bits).
// Throws CapabilityError for n > 8.
std::vector<CanonicalGraph> enumerate_nonisomorphic(int n);

// Isomorphism classes of graphs with between 1 and `order` edges, no
// isolated nodes, and at most `max_nodes` nodes.
struct SubgraphBasis {
  int order = 0;
  int max_nodes = 0;
  std::vector<CanonicalGraph> elements;

  std::size_t size() const noexcept { return elements.size(); }
  const Graph& graph(std::size_t i) const { return elements[i].graph; }
  int edges(std::size_t i) const { return elements[i].graph.edge_count(); }
  int nodes(std::size_t i) const { return elements[i].graph.nodes(); }

  // Index of the element isomorphic to g once isolated nodes are dropped.
  std::optional<std::size_t> find(const Graph& g) const;
  std::string name(std::size_t i) const;

  friend bool operator==(const SubgraphBasis&, const SubgraphBasis&) = default;
};

SubgraphBasis enumerate_basis(int order, int max_nodes);

// Human-readable name for small named graphs ("edge", "cherry", "triangle",
// ...); falls back to an edge-list id.
std::string subgraph_name(const Graph& g);

std::uint64_t factorial(int n);

}  // namespace graphprior
