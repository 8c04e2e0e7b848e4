#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hiernet/errors.hpp"

namespace hiernet {

// Nodes are 1-based in files and messages, 0-based internally. Dyads (i,j)
// with i < j are numbered lexicographically: (1,2),(1,3),...,(n-1,n).

inline int dyad_count(int n) { return n * (n - 1) / 2; }

// 1-based endpoints to the lexicographic dyad index in 0..m-1.
int dyad_index(int i, int j, int n);

// Inverse of dyad_index; returns 1-based (i, j) with i < j.
std::pair<int, int> dyad_from_index(int idx, int n);

// Undirected network on n labeled nodes stored as a bit per dyad.
class Network {
 public:
  Network() = default;
  explicit Network(int n);

  int n() const { return n_; }
  int dyads() const { return m_; }

  bool test(int idx) const {
    return (words_[std::size_t(idx) >> 6] >> (idx & 63)) & 1u;
  }
  void set(int idx, bool value);

  // 1-based endpoints.
  bool has_edge(int i, int j) const;
  void set_edge(int i, int j, bool value);

  std::int64_t edge_count() const;

  // 1-based degree of every node.
  std::vector<int> degrees() const;

  bool operator==(const Network& other) const {
    return n_ == other.n_ && words_ == other.words_;
  }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<std::uint64_t> words_;
};

// Dependency graph: a simple undirected graph whose nodes are the m dyad
// labels of an n-node network.
class DependencyGraph {
 public:
  DependencyGraph() = default;

  // Edges are unordered pairs of dyad indices; duplicates collapse, loops are
  // rejected.
  DependencyGraph(int n, const std::vector<std::pair<int, int>>& edges);

  int n() const { return n_; }
  int m() const { return m_; }
  int num_edges() const { return int(edges_.size()); }

  bool has_edge(int a, int b) const;
  int degree(int a) const { return int(adj_[std::size_t(a)].size()); }
  const std::vector<int>& neighbors(int a) const { return adj_[std::size_t(a)]; }

  // Sorted list of edges (a, b) with a < b.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  DependencyGraph without_edge(int a, int b) const;

  bool operator==(const DependencyGraph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

// Line graph of the complete graph on n nodes: dyad labels are adjacent iff
// they share a network node. This is the largest dependency graph that
// satisfies the Markov dependence property.
DependencyGraph build_line_graph(int n);

struct MarkovCheck {
  // Dependency edges joining dyads with no common network node.
  std::vector<std::pair<int, int>> violations;
  bool ok() const { return violations.empty(); }
};

// A dependency graph satisfies the Markov dependence property iff every edge
// joins two dyads sharing a network node (i.e. it is a subgraph of the line
// graph of the complete graph).
MarkovCheck validate_markov(const DependencyGraph& dep);

// The model is invariant under relabeling of the network nodes iff the
// dependency graph is edgeless or the full line graph.
bool is_exchangeable_dep(const DependencyGraph& dep);

// Dependency graph made of disjoint complete components plus isolated dyads:
// entry k of sizes requests a clique of sizes[k] dyads sharing one hub node.
// Components occupy disjoint node ranges starting at node 1.
DependencyGraph make_disjoint_clique_dep(int n, const std::vector<int>& sizes);

}  // namespace hiernet
