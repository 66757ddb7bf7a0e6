#include "graphprior/cumulants.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "graphprior/density.hpp"
#include "graphprior/error.hpp"

namespace graphprior {
namespace {

// Restricted growth strings enumerate every set partition of {0..m-1} once.
template <typename Fn>
void for_each_set_partition(int m, Fn&& fn) {
  std::vector<int> a(m, 0), maxes(m, 0);
  while (true) {
    fn(a);
    int i = m - 1;
    while (i > 0 && a[i] == maxes[i - 1] + 1) --i;
    if (i <= 0) return;
    ++a[i];
    maxes[i] = std::max(maxes[i - 1], a[i]);
    for (int j = i + 1; j < m; ++j) {
      a[j] = 0;
      maxes[j] = maxes[i];
    }
  }
}

}  // namespace

PartitionExpansion::PartitionExpansion(const SubgraphBasis& basis) {
  std::map<Graph, std::size_t> index;
  bool have_edge = false;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    index.emplace(basis.graph(i), i);
    if (basis.edges(i) == 1) {
      edge_ = i;
      have_edge = true;
    }
  }
  if (!have_edge) throw ArgumentError("cumulant basis must contain the edge");
  partitions_.resize(basis.size());
  for (std::size_t g = 0; g < basis.size(); ++g) {
    const Graph& graph = basis.graph(g);
    const auto edges = graph.edges();
    const int m = static_cast<int>(edges.size());
    if (m <= 1) continue;
    for_each_set_partition(m, [&](const std::vector<int>& label) {
      const int blocks = *std::max_element(label.begin(), label.end()) + 1;
      if (blocks == 1) return;
      std::vector<Graph> parts(blocks, Graph(graph.nodes()));
      for (int e = 0; e < m; ++e) parts[label[e]].set_edge(edges[e].first, edges[e].second);
      std::vector<std::size_t> ids;
      ids.reserve(blocks);
      for (const auto& p : parts) {
        const Graph key = canonical_form(drop_isolated(p)).graph;
        auto it = index.find(key);
        if (it == index.end()) {
          throw ArgumentError("basis is not closed under edge subsets: missing " + key.to_string());
        }
        ids.push_back(it->second);
      }
      partitions_[g].push_back(std::move(ids));
    });
  }
}

MomentVector moments_of_prior(const PriorTable& prior, const SubgraphBasis& basis) {
  MomentVector mv;
  mv.basis = basis;
  mv.values.assign(basis.size(), 0.0);
  auto table = feature_table(prior.nodes(), basis);
  const auto& classes = prior.classes();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const double p = prior.prob(c);
    if (p == 0.0) continue;
    auto row = table->row(classes[c].graph.bits());
    for (std::size_t i = 0; i < basis.size(); ++i) mv.values[i] += p * row[i];
  }
  return mv;
}

CumulantVector cumulants_from_moments(const MomentVector& moments) {
  if (moments.values.size() != moments.basis.size()) {
    throw ArgumentError("moment vector does not match its basis");
  }
  PartitionExpansion expansion(moments.basis);
  CumulantVector c;
  c.basis = moments.basis;
  c.moments = moments.values;
  c.kappas.assign(moments.values.size(), 0.0);
  c.scaled.assign(moments.values.size(), std::nullopt);
  // Elements are sorted by edge count, so every block cumulant is ready.
  for (std::size_t g = 0; g < c.kappas.size(); ++g) {
    double k = moments.values[g];
    for (const auto& blocks : expansion.partitions(g)) {
      double prod = 1.0;
      for (std::size_t b : blocks) prod *= c.kappas[b];
      k -= prod;
    }
    c.kappas[g] = k;
  }
  return c;
}

CumulantVector scaled_cumulants(CumulantVector c) {
  std::size_t edge = c.basis.size();
  for (std::size_t i = 0; i < c.basis.size(); ++i)
    if (c.basis.edges(i) == 1) edge = i;
  if (edge == c.basis.size()) throw ArgumentError("cumulant basis must contain the edge");
  const double mu_e = c.moments[edge];
  c.scaled.assign(c.kappas.size(), std::nullopt);
  if (!(mu_e > 0.0)) return c;
  for (std::size_t i = 0; i < c.kappas.size(); ++i)
    c.scaled[i] = c.kappas[i] / std::pow(mu_e, c.basis.edges(i));
  return c;
}

MomentVector moments_from_cumulants(const SubgraphBasis& basis, const std::vector<double>& kappas) {
  if (kappas.size() != basis.size()) throw ArgumentError("cumulant vector does not match its basis");
  PartitionExpansion expansion(basis);
  MomentVector mv;
  mv.basis = basis;
  mv.values.resize(kappas.size());
  for (std::size_t g = 0; g < kappas.size(); ++g) {
    double m = kappas[g];
    for (const auto& blocks : expansion.partitions(g)) {
      double prod = 1.0;
      for (std::size_t b : blocks) prod *= kappas[b];
      m += prod;
    }
    mv.values[g] = m;
  }
  return mv;
}

std::string cumulants_csv(const CumulantVector& c) {
  std::ostringstream os;
  os.precision(17);
  os << "subgraph,edges,moment,cumulant,scaled_cumulant\n";
  for (std::size_t i = 0; i < c.kappas.size(); ++i) {
    os << c.basis.name(i) << ',' << c.basis.edges(i) << ',' << c.moments[i] << ',' << c.kappas[i] << ',';
    if (i < c.scaled.size() && c.scaled[i]) {
      os << *c.scaled[i];
    } else {
      os << "nan";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace graphprior
