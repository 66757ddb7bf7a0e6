#pragma once

#include <memory>
#include <span>
#include <vector>

#include "graphprior/canonical.hpp"

namespace graphprior {

// Normalised probabilities over the isomorphism classes of n-node graphs
// (n <= 8), aligned with ClassIndex::get(n)->classes(). Class probabilities
// already include the orbit weight; a single labeled graph of class c has
// probability prob(c) / orbit_size(c).
class PriorTable {
 public:
  PriorTable() = default;
  // `probs` must be non-negative and sum to 1 within 1e-12.
  PriorTable(int n, std::vector<double> probs);
  // Normalises arbitrary non-negative class weights.
  static PriorTable from_weights(int n, std::vector<double> weights);
  // Normalises per-labeled-graph weights w(c), i.e. class mass orbit(c) * w(c).
  static PriorTable from_labeled_weights(int n, std::span<const double> weights);
  static PriorTable uniform_labeled(int n);
  static PriorTable point_mass(const Graph& g);
  // Erdos-Renyi G(n, rho).
  static PriorTable erdos_renyi(int n, double rho);

  int nodes() const noexcept { return n_; }
  std::size_t size() const noexcept { return probs_.size(); }
  const ClassIndex& classes() const { return *classes_; }
  std::shared_ptr<const ClassIndex> class_index() const { return classes_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double prob(std::size_t cls) const { return probs_.at(cls); }
  double class_prob(const Graph& g) const { return probs_[classes_->index_of(g)]; }
  double labeled_prob(const Graph& g) const;
  // Per-labeled-graph probability for every class (prob / orbit).
  std::vector<double> labeled_probs() const;

  // Mixture alpha * this + (1 - alpha) * other.
  PriorTable mix(const PriorTable& other, double alpha) const;

 private:
  int n_ = 0;
  std::shared_ptr<const ClassIndex> classes_;
  std::vector<double> probs_;
};

}  // namespace graphprior
