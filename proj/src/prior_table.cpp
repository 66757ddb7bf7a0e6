#include "graphprior/prior_table.hpp"

#include <cmath>
#include <numeric>

#include "graphprior/error.hpp"

namespace graphprior {

PriorTable::PriorTable(int n, std::vector<double> probs)
    : n_(n), classes_(ClassIndex::get(n)), probs_(std::move(probs)) {
  if (probs_.size() != classes_->size()) {
    throw ArgumentError("prior table size does not match the number of graph classes");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ArgumentError("prior probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("prior probabilities must sum to 1");
}

PriorTable PriorTable::from_weights(int n, std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("class weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ArgumentError("class weights sum to zero");
  for (double& w : weights) w /= total;
  // Renormalise once more so the sum is 1 to rounding.
  const double again = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= again;
  return PriorTable(n, std::move(weights));
}

PriorTable PriorTable::from_labeled_weights(int n, std::span<const double> weights) {
  auto index = ClassIndex::get(n);
  if (weights.size() != index->size()) throw ArgumentError("weight count does not match classes");
  std::vector<double> mass(index->size());
  for (std::size_t c = 0; c < mass.size(); ++c)
    mass[c] = weights[c] * static_cast<double>((*index)[c].orbit_size);
  return from_weights(n, std::move(mass));
}

PriorTable PriorTable::uniform_labeled(int n) {
  auto index = ClassIndex::get(n);
  std::vector<double> ones(index->size(), 1.0);
  return from_labeled_weights(n, ones);
}

PriorTable PriorTable::point_mass(const Graph& g) {
  auto index = ClassIndex::get(g.nodes());
  std::vector<double> probs(index->size(), 0.0);
  probs[index->index_of(g)] = 1.0;
  return PriorTable(g.nodes(), std::move(probs));
}

PriorTable PriorTable::erdos_renyi(int n, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ArgumentError("edge probability must be in [0, 1]");
  auto index = ClassIndex::get(n);
  const int m = relation_count(n);
  std::vector<double> w(index->size());
  for (std::size_t c = 0; c < w.size(); ++c) {
    const int e = (*index)[c].graph.edge_count();
    w[c] = std::pow(rho, e) * std::pow(1.0 - rho, m - e);
  }
  return from_labeled_weights(n, w);
}

double PriorTable::labeled_prob(const Graph& g) const {
  const std::size_t c = classes_->index_of(g);
  return probs_[c] / static_cast<double>((*classes_)[c].orbit_size);
}

std::vector<double> PriorTable::labeled_probs() const {
  std::vector<double> out(probs_.size());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = probs_[c] / static_cast<double>((*classes_)[c].orbit_size);
  return out;
}

PriorTable PriorTable::mix(const PriorTable& other, double alpha) const {
  if (other.n_ != n_) throw ArgumentError("cannot mix priors over different node counts");
  std::vector<double> p(probs_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = alpha * probs_[i] + (1.0 - alpha) * other.probs_[i];
  return from_weights(n_, std::move(p));
}

}  // namespace graphprior
