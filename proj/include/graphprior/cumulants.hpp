#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graphprior/canonical.hpp"
#include "graphprior/prior_table.hpp"

namespace graphprior {

// Expected injective densities E[mu_g] of a distribution, one per basis
// element.
struct MomentVector {
  SubgraphBasis basis;
  std::vector<double> values;
};

struct CumulantVector {
  SubgraphBasis basis;
  std::vector<double> moments;
  std::vector<double> kappas;
  // kappa_g / E[mu_edge]^E(g); nullopt when the edge density is zero or the
  // scaling has not been applied.
  std::vector<std::optional<double>> scaled;
};

MomentVector moments_of_prior(const PriorTable& prior, const SubgraphBasis& basis);

// For each basis element g, the non-trivial partitions of its edge set, each
// given as the basis indices of the block-induced subgraphs. Throws
// ArgumentError if a block subgraph is missing from the basis.
class PartitionExpansion {
 public:
  explicit PartitionExpansion(const SubgraphBasis& basis);
  const std::vector<std::vector<std::size_t>>& partitions(std::size_t element) const {
    return partitions_.at(element);
  }
  std::size_t edge_index() const noexcept { return edge_; }

 private:
  std::vector<std::vector<std::vector<std::size_t>>> partitions_;
  std::size_t edge_ = 0;
};

// kappa_g = E[mu_g] - sum over non-trivial edge partitions of the product of
// block cumulants. `scaled` is left empty.
CumulantVector cumulants_from_moments(const MomentVector& moments);

// Fills `scaled`.
CumulantVector scaled_cumulants(CumulantVector c);

// Inverse map: moments as the sum over all edge partitions of products of
// cumulants.
MomentVector moments_from_cumulants(const SubgraphBasis& basis, const std::vector<double>& kappas);

// CSV with header: subgraph,edges,moment,cumulant,scaled_cumulant.
std::string cumulants_csv(const CumulantVector& c);

}  // namespace graphprior
