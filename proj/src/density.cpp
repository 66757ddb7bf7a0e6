#include "graphprior/density.hpp"

#include <algorithm>
#include <map>

#include "graphprior/error.hpp"

namespace graphprior {
namespace {

struct Matcher {
  int k;
  std::array<std::uint16_t, kMaxNodes> pattern_adj;
  std::array<std::uint16_t, kMaxNodes> host_adj;
  std::array<int, kMaxNodes> order{};
  std::array<int, kMaxNodes> image{};
  std::uint16_t host_all;

  std::uint64_t count(int depth, std::uint16_t used) {
    if (depth == k) return 1;
    const int v = order[depth];
    std::uint16_t cand = static_cast<std::uint16_t>(host_all & ~used);
    for (int d = 0; d < depth; ++d) {
      const int u = order[d];
      if (pattern_adj[v] >> u & 1) cand &= host_adj[image[u]];
    }
    std::uint64_t total = 0;
    while (cand) {
      const int w = __builtin_ctz(cand);
      cand &= static_cast<std::uint16_t>(cand - 1);
      image[v] = w;
      total += count(depth + 1, static_cast<std::uint16_t>(used | (1u << w)));
    }
    return total;
  }
};

// Map the most-constrained pattern vertices first.
std::array<int, kMaxNodes> match_order(int k, const std::array<std::uint16_t, kMaxNodes>& adj) {
  std::array<int, kMaxNodes> order{};
  std::uint16_t placed = 0;
  for (int d = 0; d < k; ++d) {
    int best = -1, best_back = -1, best_deg = -1;
    for (int v = 0; v < k; ++v) {
      if (placed >> v & 1) continue;
      const int back = __builtin_popcount(adj[v] & placed);
      const int deg = __builtin_popcount(adj[v]);
      if (back > best_back || (back == best_back && deg > best_deg)) {
        best = v;
        best_back = back;
        best_deg = deg;
      }
    }
    order[d] = best;
    placed |= static_cast<std::uint16_t>(1u << best);
  }
  return order;
}

}  // namespace

DensityRatio injective_count(const Graph& pattern, const Graph& host) {
  const int k = pattern.nodes();
  const int n = host.nodes();
  DensityRatio r;
  if (k > n) {
    r.count = 0;
    r.maps = 1;
    return r;
  }
  r.maps = 1;
  for (int i = 0; i < k; ++i) r.maps *= static_cast<std::uint64_t>(n - i);
  Matcher m{};
  m.k = k;
  m.pattern_adj = pattern.adjacency();
  m.host_adj = host.adjacency();
  m.order = match_order(k, m.pattern_adj);
  m.host_all = static_cast<std::uint16_t>((1u << n) - 1);
  r.count = m.count(0, 0);
  return r;
}

double injective_density(const Graph& pattern, const Graph& host) {
  return injective_count(pattern, host).value();
}

FeatureTable::FeatureTable(int n, SubgraphBasis basis) : n_(n), basis_(std::move(basis)) {
  if (n < 1 || n > kMaxNodes) throw ArgumentError("feature table node count out of range");
  if (n <= 7) {
    classes_ = ClassIndex::get(n);
    const std::size_t d = basis_.size();
    class_rows_.resize(classes_->size() * d);
    for (std::size_t c = 0; c < classes_->size(); ++c)
      for (std::size_t i = 0; i < d; ++i)
        class_rows_[c * d + i] = injective_density(basis_.graph(i), (*classes_)[c].graph);
  }
}

std::span<const double> FeatureTable::row(EdgeBits bits) const {
  const std::size_t d = basis_.size();
  if (classes_) {
    const std::size_t c = classes_->index_of_bits(bits.low64());
    return {class_rows_.data() + c * d, d};
  }
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(bits); it != cache_.end()) return {it->second.get(), d};
  }
  auto values = std::make_unique<double[]>(d);
  const Graph host(n_, bits);
  for (std::size_t i = 0; i < d; ++i) values[i] = injective_density(basis_.graph(i), host);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(bits, std::move(values));
  return {it->second.get(), d};
}

std::vector<double> FeatureTable::features(const Graph& g) const {
  if (g.nodes() != n_) throw ArgumentError("graph node count does not match feature table");
  auto r = row(g.bits());
  return {r.begin(), r.end()};
}

std::shared_ptr<const FeatureTable> feature_table(int n, const SubgraphBasis& basis) {
  static std::mutex mutex;
  static std::map<std::pair<int, std::vector<EdgeBits>>, std::shared_ptr<const FeatureTable>> cache;
  std::vector<EdgeBits> key;
  key.reserve(basis.size() * 2);
  for (const auto& e : basis.elements) {
    key.push_back(e.graph.bits());
    key.push_back(EdgeBits{static_cast<unsigned __int128>(e.graph.nodes())});
  }
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, key}];
  if (slot) return slot;
  auto table = std::make_shared<const FeatureTable>(n, basis);
  slot = table;
  return table;
}

}  // namespace graphprior
