#pragma once

#include <cstdint>
#include <vector>

#include "hiernet/cliques.hpp"
#include "hiernet/graph.hpp"

namespace hiernet {

// Sufficient statistics of the hierarchical Erdos-Renyi model: s[r-1] counts
// the activated size-r star cliques (all member dyads present), s_t the
// activated triangle cliques. s[0] is the edge count.
struct HERStats {
  std::vector<std::int64_t> s;
  std::int64_t s_t = 0;
};

// Sufficient statistics of the hierarchical beta-model. d_stats is n x d
// row-major: entry (i, r) counts activated size-r star cliques with hub i;
// for r = 1 a present dyad contributes to both endpoints, so column 1 is the
// degree sequence. d_t[i] counts activated triangle cliques containing i.
struct HBetaStats {
  int n = 0;
  int d = 0;
  std::vector<std::int64_t> d_stats;
  std::vector<std::int64_t> d_t;

  std::int64_t at(int node, int r) const { return d_stats[std::size_t(node) * d + (r - 1)]; }
};

HERStats her_stats(const Network& x, const CliqueCatalog& catalog);
HBetaStats hbeta_stats(const Network& x, const CliqueCatalog& catalog);

// Edge count of the network (the Erdos-Renyi statistic).
std::int64_t er_stats(const Network& x);

// Flat views aligned with the parameter layouts in params.hpp.
std::vector<double> stat_vec(const HERStats& s);
std::vector<double> stat_vec(const HBetaStats& s);

}  // namespace hiernet
