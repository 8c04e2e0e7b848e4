#include "hiernet/graph.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <string>

namespace hiernet {

namespace {

std::string pair_str(int i, int j) {
  return std::to_string(i) + "-" + std::to_string(j);
}

}  // namespace

int dyad_index(int i, int j, int n) {
  if (i < 1 || j <= i || j > n) {
    throw ValidationError("dyad (" + pair_str(i, j) + ") out of range for n=" +
                          std::to_string(n));
  }
  return (i - 1) * n - i * (i - 1) / 2 + (j - i) - 1;
}

std::pair<int, int> dyad_from_index(int idx, int n) {
  if (idx < 0 || idx >= dyad_count(n)) {
    throw ValidationError("dyad index " + std::to_string(idx) +
                          " out of range for n=" + std::to_string(n));
  }
  int i = 1;
  int row = n - 1;  // dyads with first endpoint i
  while (idx >= row) {
    idx -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + idx};
}

Network::Network(int n) : n_(n), m_(dyad_count(n)) {
  if (n < 1) throw ValidationError("network needs n >= 1");
  words_.assign((std::size_t(m_) + 63) / 64, 0);
  if (words_.empty()) words_.push_back(0);
}

void Network::set(int idx, bool value) {
  if (idx < 0 || idx >= m_) {
    throw ValidationError("dyad index " + std::to_string(idx) + " out of range");
  }
  const std::uint64_t bit = std::uint64_t(1) << (idx & 63);
  if (value)
    words_[std::size_t(idx) >> 6] |= bit;
  else
    words_[std::size_t(idx) >> 6] &= ~bit;
}

bool Network::has_edge(int i, int j) const { return test(dyad_index(i, j, n_)); }

void Network::set_edge(int i, int j, bool value) { set(dyad_index(i, j, n_), value); }

std::int64_t Network::edge_count() const {
  std::int64_t total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

std::vector<int> Network::degrees() const {
  std::vector<int> deg(std::size_t(n_), 0);
  for (int idx = 0; idx < m_; ++idx) {
    if (!test(idx)) continue;
    auto [i, j] = dyad_from_index(idx, n_);
    ++deg[std::size_t(i - 1)];
    ++deg[std::size_t(j - 1)];
  }
  return deg;
}

DependencyGraph::DependencyGraph(int n, const std::vector<std::pair<int, int>>& edges)
    : n_(n), m_(dyad_count(n)) {
  if (n < 1) throw ValidationError("dependency graph needs n >= 1");
  std::set<std::pair<int, int>> unique;
  for (auto [a, b] : edges) {
    if (a == b) {
      throw ValidationError("dependency graph has a loop at dyad node " +
                            std::to_string(a));
    }
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= m_) {
      throw ValidationError("dependency edge (" + std::to_string(a) + "," +
                            std::to_string(b) + ") out of range for m=" +
                            std::to_string(m_));
    }
    unique.emplace(a, b);
  }
  edges_.assign(unique.begin(), unique.end());
  adj_.assign(std::size_t(m_), {});
  for (auto [a, b] : edges_) {
    adj_[std::size_t(a)].push_back(b);
    adj_[std::size_t(b)].push_back(a);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

bool DependencyGraph::has_edge(int a, int b) const {
  if (a < 0 || b < 0 || a >= m_ || b >= m_ || a == b) return false;
  const auto& nb = adj_[std::size_t(a)];
  return std::binary_search(nb.begin(), nb.end(), b);
}

DependencyGraph DependencyGraph::without_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  std::vector<std::pair<int, int>> kept;
  kept.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.first == a && e.second == b) continue;
    kept.push_back(e);
  }
  return DependencyGraph(n_, kept);
}

DependencyGraph build_line_graph(int n) {
  if (n < 2) throw ValidationError("line graph needs n >= 2");
  const int m = dyad_count(n);
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < m; ++a) {
    auto [i1, j1] = dyad_from_index(a, n);
    for (int b = a + 1; b < m; ++b) {
      auto [i2, j2] = dyad_from_index(b, n);
      if (i1 == i2 || i1 == j2 || j1 == i2 || j1 == j2) edges.emplace_back(a, b);
    }
  }
  return DependencyGraph(n, edges);
}

MarkovCheck validate_markov(const DependencyGraph& dep) {
  MarkovCheck check;
  const int n = dep.n();
  for (auto [a, b] : dep.edges()) {
    auto [i1, j1] = dyad_from_index(a, n);
    auto [i2, j2] = dyad_from_index(b, n);
    const bool share = i1 == i2 || i1 == j2 || j1 == i2 || j1 == j2;
    if (!share) check.violations.emplace_back(a, b);
  }
  return check;
}

bool is_exchangeable_dep(const DependencyGraph& dep) {
  if (dep.num_edges() == 0) return true;
  return dep == build_line_graph(dep.n());
}

DependencyGraph make_disjoint_clique_dep(int n, const std::vector<int>& sizes) {
  std::vector<std::pair<int, int>> edges;
  int next_node = 1;  // 1-based hub of the next component
  for (int size : sizes) {
    if (size < 1) throw ValidationError("clique component size must be >= 1");
    const int hub = next_node;
    if (hub + size > n) {
      throw ValidationError("clique components need more than n=" +
                            std::to_string(n) + " nodes");
    }
    std::vector<int> members;
    for (int s = 1; s <= size; ++s) {
      members.push_back(dyad_index(hub, hub + s, n));
    }
    for (std::size_t p = 0; p < members.size(); ++p)
      for (std::size_t q = p + 1; q < members.size(); ++q)
        edges.emplace_back(members[p], members[q]);
    next_node = hub + size + 1;
  }
  return DependencyGraph(n, edges);
}

}  // namespace hiernet
