#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "graphprior/canonical.hpp"
#include "graphprior/graph.hpp"

namespace graphprior {

// Exact injective homomorphism count: `count` of the `maps` injective node
// maps g -> G send every edge of g onto an edge of G.
struct DensityRatio {
  std::uint64_t count = 0;
  std::uint64_t maps = 1;
  double value() const noexcept {
    return static_cast<double>(count) / static_cast<double>(maps);
  }
};

// When g has more nodes than G no injective map exists and the density is 0.
DensityRatio injective_count(const Graph& pattern, const Graph& host);
double injective_density(const Graph& pattern, const Graph& host);

// Densities of every basis element in n-node graphs, memoised. For n <= 7 the
// densities are stored per isomorphism class; otherwise counted on demand
// and cached by labeled graph. Safe for concurrent use.
class FeatureTable {
 public:
  FeatureTable(int n, SubgraphBasis basis);

  int nodes() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return basis_.size(); }
  const SubgraphBasis& basis() const noexcept { return basis_; }

  // Feature row for the n-node graph with these edge bits.
  std::span<const double> row(EdgeBits bits) const;
  std::span<const double> row(const Graph& g) const { return row(g.bits()); }
  std::vector<double> features(const Graph& g) const;

 private:
  int n_;
  SubgraphBasis basis_;
  std::shared_ptr<const ClassIndex> classes_;
  std::vector<double> class_rows_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<EdgeBits, std::unique_ptr<double[]>> cache_;
};

// Shared FeatureTable per (n, basis); avoids recomputing class rows across
// fits that use the same model shape.
std::shared_ptr<const FeatureTable> feature_table(int n, const SubgraphBasis& basis);

}  // namespace graphprior
