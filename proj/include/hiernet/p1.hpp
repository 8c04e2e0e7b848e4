#pragma once

#include <cstdint>
#include <vector>

#include "hiernet/cliques.hpp"

namespace hiernet {

// Directed network over the m lexicographic dyads. Each dyad (i, j) with
// i < j carries a two-bit state (a, b), encoded (a << 1) | b: a is the arrow
// i -> j, b the arrow j -> i. The file codes "00", "10", "01", "11" spell ab,
// so "10" is an arrow from i to j.
struct DirectedNetwork {
  int n = 0;
  std::vector<std::uint8_t> states;

  explicit DirectedNetwork(int n_ = 0)
      : n(n_), states(std::size_t(dyad_count(n_)), 0) {}

  // Arrow from p to q, 1-based nodes in either order.
  bool arrow(int p, int q) const {
    if (p < q) return (states[std::size_t(dyad_index(p, q, n))] >> 1) & 1;
    return states[std::size_t(dyad_index(q, p, n))] & 1;
  }
};

// Hierarchical p1 parameters with density theta = 0 and reciprocation rho = 0:
// per-node out (alpha) and in (beta) star parameters, n x d row-major, plus
// the per-node triangle-clause vectors. Missing rows or vectors mean zero.
struct P1Params {
  int n = 0;
  int d = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> alpha_t;
  std::vector<double> beta_t;
  std::vector<double> tau;

  static P1Params zeros(int n, int d);

  double alpha_at(int node, int r) const;  // 0-based node, size r >= 1
  double beta_at(int node, int r) const;
  double alpha_t_at(int node) const;
  double beta_t_at(int node) const;
  double tau_at(int node) const;
};

// Unnormalized log-density: the sum of the clique interaction terms. Stars
// contribute only in the all-out (beta of the hub) and all-in (alpha of the
// hub) orientations; the triangle clause is the five-term appendix sum.
double p1_log_unnorm(const DirectedNetwork& x, const P1Params& params,
                     const CliqueCatalog& catalog);

// Exact log normalizing constant by enumerating all 4^m dyad states; n <= 4.
double p1_psi_enum(const P1Params& params, const CliqueCatalog& catalog);

double p1_prob(const DirectedNetwork& x, const P1Params& params,
               const CliqueCatalog& catalog);

}  // namespace hiernet
