#include "hiernet/p1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hiernet/errors.hpp"

namespace hiernet {

P1Params P1Params::zeros(int n, int d) {
  P1Params p;
  p.n = n;
  p.d = d;
  p.alpha.assign(std::size_t(n) * d, 0.0);
  p.beta.assign(std::size_t(n) * d, 0.0);
  p.alpha_t.assign(std::size_t(n), 0.0);
  p.beta_t.assign(std::size_t(n), 0.0);
  p.tau.assign(std::size_t(n), 0.0);
  return p;
}

double P1Params::alpha_at(int node, int r) const {
  if (r > d || alpha.empty()) return 0.0;
  return alpha[std::size_t(node) * d + (r - 1)];
}

double P1Params::beta_at(int node, int r) const {
  if (r > d || beta.empty()) return 0.0;
  return beta[std::size_t(node) * d + (r - 1)];
}

double P1Params::alpha_t_at(int node) const {
  return alpha_t.empty() ? 0.0 : alpha_t[std::size_t(node)];
}

double P1Params::beta_t_at(int node) const {
  return beta_t.empty() ? 0.0 : beta_t[std::size_t(node)];
}

double P1Params::tau_at(int node) const {
  return tau.empty() ? 0.0 : tau[std::size_t(node)];
}

double p1_log_unnorm(const DirectedNetwork& x, const P1Params& params,
                     const CliqueCatalog& catalog) {
  if (x.n != catalog.n) {
    throw ValidationError("directed network has n=" + std::to_string(x.n) +
                          " but catalog has n=" + std::to_string(catalog.n));
  }
  if (params.n != catalog.n) {
    throw ValidationError("p1 parameters have the wrong node count");
  }

  double total = 0.0;
  for (const Clique& c : catalog.cliques) {
    if (c.kind == CliqueKind::Triangle) {
      // Appendix triangle clause for C = {ij, jk, ki}, nodes sorted i < j < k.
      const int i = c.tri_nodes[0] + 1, j = c.tri_nodes[1] + 1, k = c.tri_nodes[2] + 1;
      const double aij = x.arrow(i, j), aji = x.arrow(j, i);
      const double ajk = x.arrow(j, k), akj = x.arrow(k, j);
      const double aki = x.arrow(k, i), aik = x.arrow(i, k);
      const int i0 = i - 1, j0 = j - 1, k0 = k - 1;
      total += (params.beta_t_at(j0) + params.alpha_t_at(k0)) * aij * akj * aki;
      total += (params.beta_t_at(k0) + params.alpha_t_at(i0)) * aij * ajk * aik;
      total += (params.beta_t_at(j0) + params.alpha_t_at(i0)) * aij * akj * aik;
      total += (params.tau_at(i0) + params.alpha_t_at(j0)) * aji * ajk * aki;
      total += (params.beta_t_at(k0) + params.alpha_t_at(j0)) * aji * ajk * aik;
    } else if (c.size() == 1) {
      const auto [i, j] = dyad_from_index(c.dyads[0], catalog.n);
      if (x.arrow(i, j))
        total += params.alpha_at(i - 1, 1) + params.beta_at(j - 1, 1);
      if (x.arrow(j, i))
        total += params.alpha_at(j - 1, 1) + params.beta_at(i - 1, 1);
    } else {
      const int hub = c.hub + 1;
      bool all_out = true, all_in = true;
      for (int dy : c.dyads) {
        const auto [i, j] = dyad_from_index(dy, catalog.n);
        const int spoke = i == hub ? j : i;
        all_out = all_out && x.arrow(hub, spoke);
        all_in = all_in && x.arrow(spoke, hub);
        if (!all_out && !all_in) break;
      }
      if (all_out) total += params.beta_at(c.hub, c.size());
      if (all_in) total += params.alpha_at(c.hub, c.size());
    }
  }
  return total;
}

double p1_psi_enum(const P1Params& params, const CliqueCatalog& catalog) {
  if (catalog.n > 4) {
    throw ComputeError("p1 enumeration limited to n <= 4, got n=" +
                       std::to_string(catalog.n));
  }
  const int m = catalog.m;
  const std::uint64_t n_states = std::uint64_t(1) << (2 * m);

  DirectedNetwork x(catalog.n);
  double emax = -std::numeric_limits<double>::infinity();
  std::vector<double> energies(n_states);
  for (std::uint64_t code = 0; code < n_states; ++code) {
    for (int dy = 0; dy < m; ++dy)
      x.states[std::size_t(dy)] = std::uint8_t((code >> (2 * dy)) & 3);
    const double e = p1_log_unnorm(x, params, catalog);
    energies[code] = e;
    emax = std::max(emax, e);
  }
  double z = 0.0;
  for (double e : energies) z += std::exp(e - emax);
  return emax + std::log(z);
}

double p1_prob(const DirectedNetwork& x, const P1Params& params,
               const CliqueCatalog& catalog) {
  return std::exp(p1_log_unnorm(x, params, catalog) - p1_psi_enum(params, catalog));
}

}  // namespace hiernet
