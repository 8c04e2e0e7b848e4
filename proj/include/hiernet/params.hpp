#pragma once

#include <vector>

#include "hiernet/errors.hpp"

namespace hiernet {

// Hierarchical Erdos-Renyi parameters: one q per star-clique size plus a
// triangle parameter. q[r-1] is the natural parameter of size-r star cliques.
// A q shorter than the catalog's d means the tail is structurally zero, which
// keeps the hierarchy q^(r) = 0 => q^(r+1) = 0 by construction.
struct HERParams {
  std::vector<double> q;
  double t = 0.0;
};

// Hierarchical beta-model parameters: per-node, per-size star parameters and
// per-node triangle parameters. beta is n x d row-major.
struct HBetaParams {
  int n = 0;
  int d = 0;
  std::vector<double> beta;
  std::vector<double> tau;

  double beta_at(int node, int r) const { return beta[std::size_t(node) * d + (r - 1)]; }
  double& beta_at(int node, int r) { return beta[std::size_t(node) * d + (r - 1)]; }

  static HBetaParams zeros(int n, int d) {
    HBetaParams p;
    p.n = n;
    p.d = d;
    p.beta.assign(std::size_t(n) * d, 0.0);
    p.tau.assign(std::size_t(n), 0.0);
    return p;
  }
};

// Flat coordinate layouts shared by statistics, expectations and gradients.
// HER: [q^(1)..q^(d), t]. HBeta: [(node, size) row-major, then tau_1..tau_n].

inline int her_dim(int d) { return d + 1; }

inline std::vector<double> her_param_vec(const HERParams& p, int d) {
  if (int(p.q.size()) > d) throw ValidationError("q has more entries than the catalog's max star size");
  std::vector<double> v(std::size_t(her_dim(d)), 0.0);
  for (std::size_t r = 0; r < p.q.size(); ++r) v[r] = p.q[r];
  v[std::size_t(d)] = p.t;
  return v;
}

inline HERParams her_params_from_vec(const std::vector<double>& v) {
  HERParams p;
  p.q.assign(v.begin(), v.end() - 1);
  p.t = v.back();
  return p;
}

inline int hbeta_dim(int n, int d) { return n * d + n; }
inline int hbeta_coord(int node, int r, int d) { return node * d + (r - 1); }
inline int hbeta_tau_coord(int node, int n, int d) { return n * d + node; }

inline std::vector<double> hbeta_param_vec(const HBetaParams& p) {
  std::vector<double> v(p.beta);
  v.insert(v.end(), p.tau.begin(), p.tau.end());
  return v;
}

inline HBetaParams hbeta_params_from_vec(const std::vector<double>& v, int n, int d) {
  HBetaParams p;
  p.n = n;
  p.d = d;
  p.beta.assign(v.begin(), v.begin() + std::size_t(n) * d);
  p.tau.assign(v.begin() + std::size_t(n) * d, v.end());
  return p;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace hiernet
