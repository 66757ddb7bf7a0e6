#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace graphprior {

inline constexpr int kMaxNodes = 15;
inline constexpr int kMaxSlots = kMaxNodes * (kMaxNodes - 1) / 2;

constexpr int relation_count(int n) noexcept { return n * (n - 1) / 2; }

// Fixed-width bit set over relation slots. Slot s is bit s; the integer
// value of the set orders graphs.
struct EdgeBits {
  unsigned __int128 value = 0;

  static EdgeBits low_mask(int count) noexcept {
    EdgeBits b;
    if (count >= 128) {
      b.value = ~static_cast<unsigned __int128>(0);
    } else {
      b.value = (static_cast<unsigned __int128>(1) << count) - 1;
    }
    return b;
  }

  bool test(int slot) const noexcept { return (value >> slot) & 1; }
  void set(int slot) noexcept { value |= static_cast<unsigned __int128>(1) << slot; }
  void reset(int slot) noexcept { value &= ~(static_cast<unsigned __int128>(1) << slot); }
  void assign(int slot, bool on) noexcept { on ? set(slot) : reset(slot); }
  bool none() const noexcept { return value == 0; }
  int count() const noexcept {
    return __builtin_popcountll(static_cast<std::uint64_t>(value)) +
           __builtin_popcountll(static_cast<std::uint64_t>(value >> 64));
  }
  std::uint64_t low64() const noexcept { return static_cast<std::uint64_t>(value); }

  friend EdgeBits operator&(EdgeBits a, EdgeBits b) noexcept { return {a.value & b.value}; }
  friend EdgeBits operator|(EdgeBits a, EdgeBits b) noexcept { return {a.value | b.value}; }
  friend EdgeBits operator^(EdgeBits a, EdgeBits b) noexcept { return {a.value ^ b.value}; }
  EdgeBits operator~() const noexcept { return {~value}; }
  friend bool operator==(EdgeBits a, EdgeBits b) noexcept = default;
  friend std::strong_ordering operator<=>(EdgeBits a, EdgeBits b) noexcept {
    return a.value <=> b.value;
  }
};

// Slot of the unordered pair {i, j} among the C(n,2) relations, in
// lexicographic (i < j) row-major order. Throws ArgumentError on i == j or
// out-of-range nodes.
int relation_index(int i, int j, int n);

// Inverse of relation_index: the (i, j) pair with i < j stored at `slot`.
std::pair<int, int> relation_pair(int slot, int n);

class Graph {
 public:
  Graph() = default;
  explicit Graph(int n);
  Graph(int n, EdgeBits bits);

  static Graph from_edges(int n, std::span<const std::pair<int, int>> edges);
  static Graph complete(int n);

  int nodes() const noexcept { return n_; }
  int slots() const noexcept { return relation_count(n_); }

  bool has_edge(int i, int j) const { return bits_.test(relation_index(i, j, n_)); }
  void set_edge(int i, int j, bool on = true) { bits_.assign(relation_index(i, j, n_), on); }

  bool slot(int s) const noexcept { return bits_.test(s); }
  void set_slot(int s, bool on) noexcept { bits_.assign(s, on); }

  int edge_count() const noexcept { return bits_.count(); }
  EdgeBits bits() const noexcept { return bits_; }

  std::vector<std::pair<int, int>> edges() const;
  // Neighbour bit masks, one per node.
  std::array<std::uint16_t, kMaxNodes> adjacency() const noexcept;
  std::vector<int> degrees() const;

  // Graph whose node `perm[v]` plays the role of node v here.
  Graph relabeled(std::span<const int> perm) const;

  std::string to_string() const;

  friend bool operator==(const Graph&, const Graph&) = default;
  friend std::strong_ordering operator<=>(const Graph& a, const Graph& b) noexcept {
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    return a.bits_ <=> b.bits_;
  }

 private:
  int n_ = 0;
  EdgeBits bits_;
};

Graph graph_from_adjacency(int n, std::span<const std::uint16_t> adjacency);

enum class Relation : std::uint8_t { Absent = 0, Present = 1, Obscured = 2 };

// A graph with some relations hidden: the evidence shown in one round.
class PartialGraph {
 public:
  PartialGraph() = default;
  PartialGraph(int n, EdgeBits present, EdgeBits obscured);
  PartialGraph(int n, std::span<const Relation> states);

  // Hide the slots of `mask` in `g`.
  static PartialGraph obscure(const Graph& g, EdgeBits mask);

  int nodes() const noexcept { return n_; }
  int slots() const noexcept { return relation_count(n_); }
  Relation state(int slot) const noexcept {
    if (obscured_.test(slot)) return Relation::Obscured;
    return present_.test(slot) ? Relation::Present : Relation::Absent;
  }
  std::vector<Relation> states() const;

  EdgeBits present() const noexcept { return present_; }
  EdgeBits obscured() const noexcept { return obscured_; }
  EdgeBits absent() const noexcept;

  int obscured_count() const noexcept { return obscured_.count(); }
  int shown_count() const noexcept { return slots() - obscured_count(); }
  double obscured_fraction() const noexcept {
    return slots() == 0 ? 0.0 : static_cast<double>(obscured_count()) / slots();
  }
  std::vector<int> obscured_slots() const;

  // Slots where `g` contradicts a shown relation; empty means consistent.
  std::vector<int> violations(const Graph& g) const;
  bool consistent(const Graph& g) const;

  friend bool operator==(const PartialGraph&, const PartialGraph&) = default;
  friend std::strong_ordering operator<=>(const PartialGraph& a,
                                          const PartialGraph& b) noexcept {
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    if (auto c = a.obscured_ <=> b.obscured_; c != 0) return c;
    return a.present_ <=> b.present_;
  }

 private:
  int n_ = 0;
  EdgeBits present_;
  EdgeBits obscured_;
};

// Range over the 2^n_obs completions of a partial graph. The k-th completion
// sets the i-th obscured slot (ascending) to bit i of k.
class CompletionRange {
 public:
  class iterator {
   public:
    using value_type = Graph;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const CompletionRange* range, EdgeBits sub, bool done)
        : range_(range), sub_(sub), done_(done) {}
    Graph operator*() const;
    iterator& operator++();
    iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) noexcept {
      return a.done_ == b.done_ && (a.done_ || a.sub_ == b.sub_);
    }

   private:
    const CompletionRange* range_ = nullptr;
    EdgeBits sub_;
    bool done_ = true;
  };

  explicit CompletionRange(const PartialGraph& pg) : pg_(pg) {}
  iterator begin() const { return iterator(this, EdgeBits{}, false); }
  iterator end() const { return iterator(this, EdgeBits{}, true); }
  std::uint64_t size() const;

 private:
  PartialGraph pg_;
};

inline CompletionRange completions(const PartialGraph& pg) { return CompletionRange(pg); }

// Calls fn(EdgeBits) for each completion in binary-counter order without
// materialising Graph objects.
template <typename Fn>
void for_each_completion_bits(const PartialGraph& pg, Fn&& fn) {
  const EdgeBits mask = pg.obscured();
  const EdgeBits base = pg.present() & ~mask;
  EdgeBits sub;
  while (true) {
    fn(base | sub);
    sub.value = (sub.value - mask.value) & mask.value;
    if (sub.none()) break;
  }
}

}  // namespace graphprior

template <>
struct std::hash<graphprior::EdgeBits> {
  std::size_t operator()(graphprior::EdgeBits b) const noexcept {
    std::uint64_t x = static_cast<std::uint64_t>(b.value) ^
                      (static_cast<std::uint64_t>(b.value >> 64) * 0x9e3779b97f4a7c15ULL);
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 29;
    return static_cast<std::size_t>(x);
  }
};

template <>
struct std::hash<graphprior::Graph> {
  std::size_t operator()(const graphprior::Graph& g) const noexcept {
    return std::hash<graphprior::EdgeBits>{}(g.bits()) ^ static_cast<std::size_t>(g.nodes());
  }
};
