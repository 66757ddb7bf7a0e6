#include "graphprior/graph.hpp"

#include <sstream>

#include "graphprior/error.hpp"

namespace graphprior {
namespace {

void check_nodes(int n) {
  if (n < 1 || n > kMaxNodes) {
    throw ArgumentError("node count must be in [1, 15], got " + std::to_string(n));
  }
}

struct PairTable {
  std::array<std::array<std::pair<int, int>, kMaxSlots>, kMaxNodes + 1> pairs{};
  PairTable() {
    for (int n = 1; n <= kMaxNodes; ++n) {
      int s = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs[n][s++] = {i, j};
    }
  }
};

const PairTable& pair_table() {
  static const PairTable table;
  return table;
}

}  // namespace

int relation_index(int i, int j, int n) {
  if (i == j) throw ArgumentError("self-loop relation requested");
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw ArgumentError("relation node out of range");
  }
  if (i > j) std::swap(i, j);
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::pair<int, int> relation_pair(int slot, int n) {
  check_nodes(n);
  if (slot < 0 || slot >= relation_count(n)) throw ArgumentError("slot out of range");
  return pair_table().pairs[n][slot];
}

Graph::Graph(int n) : n_(n) { check_nodes(n); }

Graph::Graph(int n, EdgeBits bits) : n_(n), bits_(bits) {
  check_nodes(n);
  if (!(bits & ~EdgeBits::low_mask(relation_count(n))).none()) {
    throw ArgumentError("edge bits exceed C(n,2) slots");
  }
}

Graph Graph::from_edges(int n, std::span<const std::pair<int, int>> edges) {
  Graph g(n);
  for (auto [i, j] : edges) g.set_edge(i, j);
  return g;
}

Graph Graph::complete(int n) { return Graph(n, EdgeBits::low_mask(relation_count(n))); }

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  const auto& pairs = pair_table().pairs[n_];
  for (int s = 0; s < slots(); ++s)
    if (bits_.test(s)) out.push_back(pairs[s]);
  return out;
}

std::array<std::uint16_t, kMaxNodes> Graph::adjacency() const noexcept {
  std::array<std::uint16_t, kMaxNodes> adj{};
  const auto& pairs = pair_table().pairs[n_];
  for (int s = 0; s < slots(); ++s) {
    if (!bits_.test(s)) continue;
    auto [i, j] = pairs[s];
    adj[i] |= static_cast<std::uint16_t>(1u << j);
    adj[j] |= static_cast<std::uint16_t>(1u << i);
  }
  return adj;
}

std::vector<int> Graph::degrees() const {
  auto adj = adjacency();
  std::vector<int> deg(n_);
  for (int v = 0; v < n_; ++v) deg[v] = __builtin_popcount(adj[v]);
  return deg;
}

Graph Graph::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw ArgumentError("permutation size mismatch");
  Graph out(n_);
  const auto& pairs = pair_table().pairs[n_];
  for (int s = 0; s < slots(); ++s) {
    if (!bits_.test(s)) continue;
    auto [i, j] = pairs[s];
    out.set_edge(perm[i], perm[j]);
  }
  return out;
}

std::string Graph::to_string() const {
  std::ostringstream os;
  os << "n=" << n_ << " {";
  bool first = true;
  for (auto [i, j] : edges()) {
    os << (first ? "" : ",") << i << "-" << j;
    first = false;
  }
  os << "}";
  return os.str();
}

Graph graph_from_adjacency(int n, std::span<const std::uint16_t> adjacency) {
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adjacency[i] >> j & 1) g.set_edge(i, j);
  return g;
}

PartialGraph::PartialGraph(int n, EdgeBits present, EdgeBits obscured)
    : n_(n), present_(present & ~obscured), obscured_(obscured) {
  check_nodes(n);
  const EdgeBits outside = ~EdgeBits::low_mask(relation_count(n));
  if (!((present | obscured) & outside).none()) {
    throw ArgumentError("partial graph bits exceed C(n,2) slots");
  }
}

PartialGraph::PartialGraph(int n, std::span<const Relation> states) : n_(n) {
  check_nodes(n);
  if (static_cast<int>(states.size()) != relation_count(n)) {
    throw ArgumentError("state vector length must equal C(n,2)");
  }
  for (int s = 0; s < relation_count(n); ++s) {
    if (states[s] == Relation::Present) present_.set(s);
    if (states[s] == Relation::Obscured) obscured_.set(s);
  }
}

PartialGraph PartialGraph::obscure(const Graph& g, EdgeBits mask) {
  return PartialGraph(g.nodes(), g.bits() & ~mask, mask);
}

EdgeBits PartialGraph::absent() const noexcept {
  return EdgeBits::low_mask(slots()) & ~present_ & ~obscured_;
}

std::vector<Relation> PartialGraph::states() const {
  std::vector<Relation> out(slots());
  for (int s = 0; s < slots(); ++s) out[s] = state(s);
  return out;
}

std::vector<int> PartialGraph::obscured_slots() const {
  std::vector<int> out;
  for (int s = 0; s < slots(); ++s)
    if (obscured_.test(s)) out.push_back(s);
  return out;
}

std::vector<int> PartialGraph::violations(const Graph& g) const {
  std::vector<int> bad;
  if (g.nodes() != n_) {
    for (int s = 0; s < slots(); ++s) bad.push_back(s);
    return bad;
  }
  const EdgeBits diff = (g.bits() ^ present_) & ~obscured_;
  for (int s = 0; s < slots(); ++s)
    if (diff.test(s)) bad.push_back(s);
  return bad;
}

bool PartialGraph::consistent(const Graph& g) const {
  return g.nodes() == n_ && ((g.bits() ^ present_) & ~obscured_).none();
}

Graph CompletionRange::iterator::operator*() const {
  return Graph(range_->pg_.nodes(), range_->pg_.present() | sub_);
}

CompletionRange::iterator& CompletionRange::iterator::operator++() {
  const EdgeBits mask = range_->pg_.obscured();
  sub_.value = (sub_.value - mask.value) & mask.value;
  if (sub_.none()) done_ = true;
  return *this;
}

std::uint64_t CompletionRange::size() const {
  const int k = pg_.obscured_count();
  if (k >= 64) throw CapabilityError("too many obscured relations to enumerate");
  return std::uint64_t{1} << k;
}

}  // namespace graphprior
