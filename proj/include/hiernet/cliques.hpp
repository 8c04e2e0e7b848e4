#pragma once

#include <array>
#include <vector>

#include "hiernet/graph.hpp"

namespace hiernet {

// In a Markov-valid dependency graph every clique realizes either a star in
// the network (all member dyads share one node, the hub) or a triangle
// (three dyads on three nodes, hubless).
enum class CliqueKind { Star, Triangle };

struct Clique {
  std::vector<int> dyads;  // sorted dyad indices
  CliqueKind kind = CliqueKind::Star;
  int hub = -1;                         // 0-based node; -1 for size 1 and triangles
  std::array<int, 3> tri_nodes{-1, -1, -1};  // 0-based, triangles only

  int size() const { return int(dyads.size()); }
};

struct CliqueCatalog {
  int n = 0;
  int m = 0;
  int d = 1;  // largest star-clique size
  bool has_triangles = false;

  // All cliques of all sizes, sorted by (size, member set).
  std::vector<Clique> cliques;

  // star_by_size[r-1] holds indices of the size-r star cliques.
  std::vector<std::vector<int>> star_by_size;
  std::vector<int> triangles;

  std::int64_t num_params() const { return d + (has_triangles ? 1 : 0); }
};

// Every clique of every size r >= 1, each classified as star or triangle.
// Requires a Markov-valid dependency graph; a clique that fits neither
// pattern raises ComputeError.
CliqueCatalog enumerate_cliques(const DependencyGraph& dep);

struct CoreDecomposition {
  int n = 0;
  int m = 0;
  int core_size = 0;               // m' = number of non-isolated dyads
  std::vector<int> core_dyads;     // sorted dyad indices with degree >= 1
  std::vector<int> isolated_dyads; // sorted dyad indices with degree 0
  std::vector<int> core_pos;       // dyad index -> position in core_dyads, or -1
};

// Splits the dyads into the non-isolated core and the isolated remainder.
// All cliques of size >= 2 live inside the core.
CoreDecomposition core_decompose(const DependencyGraph& dep);

}  // namespace hiernet
