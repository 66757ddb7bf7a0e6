#include "graphprior/canonical.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <numeric>
#include <unordered_set>

#include "graphprior/error.hpp"

namespace graphprior {
namespace {

using Adjacency = std::array<std::uint16_t, kMaxNodes>;

// Colour refinement followed by branch-and-bound over colour-respecting
// orderings. The canonical key is the sequence of columns col[j] (adjacency of
// position j to positions 0..j-1, earliest most significant), maximised
// lexicographically.
class Canonicalizer {
 public:
  Canonicalizer(int n, const Adjacency& adj) : n_(n), adj_(adj) {
    refine();
    find_twins();
  }

  CanonicalGraph run() {
    std::array<int, kMaxNodes> perm{};
    search(0, 0, perm);
    Adjacency out{};
    for (int p = 0; p < n_; ++p)
      for (int q = 0; q < n_; ++q)
        if (adj_[best_perm_[p]] >> best_perm_[q] & 1) out[p] |= static_cast<std::uint16_t>(1u << q);
    CanonicalGraph cg;
    cg.graph = graph_from_adjacency(n_, std::span<const std::uint16_t>(out.data(), n_));
    cg.orbit_size = factorial(n_) / (leaf_ties_ * twin_factor_);
    return cg;
  }

 private:
  void refine() {
    std::array<int, kMaxNodes> color{};
    for (int v = 0; v < n_; ++v) color[v] = __builtin_popcount(adj_[v]);
    int classes = -1;
    while (true) {
      std::vector<std::pair<std::vector<int>, int>> sig(n_);
      for (int v = 0; v < n_; ++v) {
        std::vector<int> s{color[v]};
        std::vector<int> nb;
        for (int u = 0; u < n_; ++u)
          if (adj_[v] >> u & 1) nb.push_back(color[u]);
        std::sort(nb.begin(), nb.end());
        s.insert(s.end(), nb.begin(), nb.end());
        sig[v] = {std::move(s), v};
      }
      std::vector<std::vector<int>> distinct;
      for (auto& [s, v] : sig) distinct.push_back(s);
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (auto& [s, v] : sig) {
        color[v] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), s) -
                                    distinct.begin());
      }
      const int now = static_cast<int>(distinct.size());
      if (now == classes) break;
      classes = now;
    }
    // Higher colour first; the ordering only has to be invariant.
    for (int v = 0; v < n_; ++v) color_[v] = color[v];
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return color[a] > color[b]; });
    for (int p = 0; p < n_; ++p) position_color_[p] = color[order[p]];
  }

  void find_twins() {
    for (int v = 0; v < n_; ++v) twin_rep_[v] = v;
    std::array<int, kMaxNodes> size{};
    for (int v = 0; v < n_; ++v) {
      for (int u = 0; u < v; ++u) {
        if (twin_rep_[u] != u) continue;
        const std::uint16_t nu = adj_[u] & ~static_cast<std::uint16_t>(1u << v);
        const std::uint16_t nv = adj_[v] & ~static_cast<std::uint16_t>(1u << u);
        if (nu == nv) {
          twin_rep_[v] = u;
          break;
        }
      }
      size[twin_rep_[v]]++;
    }
    twin_factor_ = 1;
    for (int v = 0; v < n_; ++v)
      if (size[v] > 1) twin_factor_ *= factorial(size[v]);
  }

  // Twins are interchangeable: only the lowest unused member of a twin class
  // may be placed next.
  bool twin_blocked(int v, std::uint16_t used) const {
    for (int u = 0; u < v; ++u)
      if (twin_rep_[u] == twin_rep_[v] && !(used >> u & 1)) return true;
    return false;
  }

  int compare_prefix(int upto) const {
    for (int j = 1; j <= upto; ++j) {
      if (cols_[j] != best_[j]) return cols_[j] < best_[j] ? -1 : 1;
    }
    return 0;
  }

  void search(int depth, std::uint16_t used, std::array<int, kMaxNodes>& perm) {
    if (depth == n_) {
      const int c = have_best_ ? compare_prefix(n_ - 1) : 1;
      if (c > 0) {
        best_ = cols_;
        best_perm_ = perm;
        have_best_ = true;
        leaf_ties_ = 1;
      } else if (c == 0) {
        ++leaf_ties_;
      }
      return;
    }
    for (int v = 0; v < n_; ++v) {
      if (used >> v & 1) continue;
      if (color_[v] != position_color_[depth]) continue;
      if (twin_blocked(v, used)) continue;
      std::uint32_t col = 0;
      for (int i = 0; i < depth; ++i)
        if (adj_[perm[i]] >> v & 1) col |= 1u << (depth - 1 - i);
      cols_[depth] = col;
      if (have_best_ && depth > 0 && compare_prefix(depth) < 0) continue;
      perm[depth] = v;
      search(depth + 1, static_cast<std::uint16_t>(used | (1u << v)), perm);
    }
  }

  int n_;
  Adjacency adj_;
  std::array<int, kMaxNodes> color_{};
  std::array<int, kMaxNodes> position_color_{};
  std::array<int, kMaxNodes> twin_rep_{};
  std::uint64_t twin_factor_ = 1;
  std::array<std::uint32_t, kMaxNodes> cols_{};
  std::array<std::uint32_t, kMaxNodes> best_{};
  std::array<int, kMaxNodes> best_perm_{};
  bool have_best_ = false;
  std::uint64_t leaf_ties_ = 0;
};

bool class_less(const CanonicalGraph& a, const CanonicalGraph& b) {
  if (a.graph.edge_count() != b.graph.edge_count())
    return a.graph.edge_count() < b.graph.edge_count();
  return a.graph < b.graph;
}

std::vector<CanonicalGraph> build_classes(int n) {
  if (n == 1) return {canonical_form(Graph(1))};
  auto smaller = ClassIndex::get(n - 1);
  std::unordered_set<EdgeBits> seen;
  std::vector<CanonicalGraph> out;
  for (const auto& cls : smaller->classes()) {
    auto adj = cls.graph.adjacency();
    for (std::uint32_t subset = 0; subset < (1u << (n - 1)); ++subset) {
      Adjacency ext = adj;
      ext[n - 1] = static_cast<std::uint16_t>(subset);
      for (int v = 0; v < n - 1; ++v)
        if (subset >> v & 1) ext[v] |= static_cast<std::uint16_t>(1u << (n - 1));
      CanonicalGraph cg = Canonicalizer(n, ext).run();
      if (seen.insert(cg.graph.bits()).second) out.push_back(cg);
    }
  }
  std::sort(out.begin(), out.end(), class_less);
  return out;
}

}  // namespace

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

CanonicalGraph canonical_form(const Graph& g) {
  return Canonicalizer(g.nodes(), g.adjacency()).run();
}

Graph drop_isolated(const Graph& g) {
  auto deg = g.degrees();
  std::vector<int> keep;
  for (int v = 0; v < g.nodes(); ++v)
    if (deg[v] > 0) keep.push_back(v);
  if (keep.empty()) return Graph(1);
  std::vector<int> new_id(g.nodes(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) new_id[keep[k]] = static_cast<int>(k);
  Graph out(static_cast<int>(keep.size()));
  for (auto [i, j] : g.edges()) out.set_edge(new_id[i], new_id[j]);
  return out;
}

ClassIndex::ClassIndex(int n) : n_(n) {
  if (n < 1 || n > kMaxEnumerableNodes) {
    throw CapabilityError("exact enumeration of graph classes needs 1 <= n <= 8, got " +
                          std::to_string(n));
  }
  classes_ = build_classes(n);
  by_bits_.reserve(classes_.size() * 2);
  for (std::size_t i = 0; i < classes_.size(); ++i)
    by_bits_.emplace(classes_[i].graph.bits(), static_cast<std::uint32_t>(i));

  if (n <= 7) {
    const int m = relation_count(n);
    dense_.assign(std::size_t{1} << m, 0);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> slot_maps;
    do {
      std::vector<int> map(m);
      for (int s = 0; s < m; ++s) {
        auto [i, j] = relation_pair(s, n);
        map[s] = relation_index(perm[i], perm[j], n);
      }
      slot_maps.push_back(std::move(map));
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      const std::uint64_t bits = classes_[c].graph.bits().low64();
      for (const auto& map : slot_maps) {
        std::uint64_t image = 0;
        for (std::uint64_t rest = bits; rest; rest &= rest - 1)
          image |= std::uint64_t{1} << map[__builtin_ctzll(rest)];
        dense_[image] = static_cast<std::uint16_t>(c);
      }
    }
  }
}

std::shared_ptr<const ClassIndex> ClassIndex::get(int n) {
  if (n < 1 || n > kMaxEnumerableNodes) {
    throw CapabilityError("exact enumeration of graph classes needs 1 <= n <= 8, got " +
                          std::to_string(n));
  }
  static std::mutex mutex;
  static std::array<std::shared_ptr<const ClassIndex>, kMaxEnumerableNodes + 1> cache;
  // Build smaller indices first so recursion never re-enters the lock.
  for (int k = 1; k <= n; ++k) {
    {
      std::lock_guard lock(mutex);
      if (cache[k]) continue;
    }
    auto built = std::make_shared<const ClassIndex>(k);
    std::lock_guard lock(mutex);
    if (!cache[k]) cache[k] = std::move(built);
  }
  std::lock_guard lock(mutex);
  return cache[n];
}

std::size_t ClassIndex::index_of(const Graph& g) const {
  if (g.nodes() != n_) throw ArgumentError("graph node count does not match class index");
  if (!dense_.empty()) return dense_[g.bits().low64()];
  auto it = by_bits_.find(canonical_form(g).graph.bits());
  if (it == by_bits_.end()) throw DataError("graph class missing from enumeration");
  return it->second;
}

std::vector<CanonicalGraph> enumerate_nonisomorphic(int n) {
  return ClassIndex::get(n)->classes();
}

SubgraphBasis enumerate_basis(int order, int max_nodes) {
  if (order < 1) throw ArgumentError("basis order must be >= 1");
  if (max_nodes < 2) throw ArgumentError("basis needs at least 2 nodes");
  SubgraphBasis basis;
  basis.order = order;
  basis.max_nodes = max_nodes;
  const int kmax = std::min(max_nodes, 2 * order);
  if (kmax > kMaxEnumerableNodes) {
    throw CapabilityError("basis would need subgraphs with more than 8 nodes");
  }
  for (int k = 2; k <= kmax; ++k) {
    for (const auto& cls : ClassIndex::get(k)->classes()) {
      const int e = cls.graph.edge_count();
      if (e < 1 || e > order) continue;
      auto deg = cls.graph.degrees();
      if (std::find(deg.begin(), deg.end(), 0) != deg.end()) continue;
      basis.elements.push_back(cls);
    }
  }
  std::stable_sort(basis.elements.begin(), basis.elements.end(),
                   [](const CanonicalGraph& a, const CanonicalGraph& b) {
                     if (a.graph.edge_count() != b.graph.edge_count())
                       return a.graph.edge_count() < b.graph.edge_count();
                     return a.graph < b.graph;
                   });
  return basis;
}

std::optional<std::size_t> SubgraphBasis::find(const Graph& g) const {
  const Graph core = drop_isolated(g);
  if (core.edge_count() == 0) return std::nullopt;
  const Graph key = canonical_form(core).graph;
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i].graph == key) return i;
  return std::nullopt;
}

std::string SubgraphBasis::name(std::size_t i) const { return subgraph_name(elements.at(i).graph); }

std::string subgraph_name(const Graph& g) {
  static const std::map<Graph, std::string> named = [] {
    using E = std::vector<std::pair<int, int>>;
    const std::vector<std::tuple<int, E, std::string>> table = {
        {2, {{0, 1}}, "edge"},
        {3, {{0, 1}, {1, 2}}, "cherry"},
        {4, {{0, 1}, {2, 3}}, "two_edges"},
        {3, {{0, 1}, {1, 2}, {0, 2}}, "triangle"},
        {4, {{0, 1}, {1, 2}, {2, 3}}, "path3"},
        {4, {{0, 1}, {0, 2}, {0, 3}}, "star3"},
        {5, {{0, 1}, {1, 2}, {3, 4}}, "cherry_edge"},
        {6, {{0, 1}, {2, 3}, {4, 5}}, "three_edges"},
        {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, "square"},
        {4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}, "paw"},
        {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}}, "diamond"},
        {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}}, "k4"},
    };
    std::map<Graph, std::string> m;
    for (const auto& [n, edges, name] : table) {
      m.emplace(canonical_form(Graph::from_edges(n, edges)).graph, name);
    }
    return m;
  }();
  const Graph key = canonical_form(g).graph;
  if (auto it = named.find(key); it != named.end()) return it->second;
  std::string id = "g" + std::to_string(key.nodes()) + "n";
  for (auto [i, j] : key.edges()) id += "_" + std::to_string(i) + std::to_string(j);
  return id;
}

}  // namespace graphprior
