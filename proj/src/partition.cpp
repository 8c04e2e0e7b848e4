#include "hiernet/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <string>

#include "hiernet/numeric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hiernet {

namespace {

// Chunk size of the subset range; fixed so that the decomposition (and the
// reduction order) does not depend on the number of workers.
constexpr std::uint64_t kChunkBits = 14;
constexpr std::uint64_t kChunk = std::uint64_t(1) << kChunkBits;

// In-place pairwise fold with a shape that depends only on the item count.
template <class T, class Merge>
void tree_fold(std::vector<T>& items, Merge merge) {
  for (std::size_t step = 1; step < items.size(); step *= 2) {
    for (std::size_t i = 0; i + step < items.size(); i += 2 * step) {
      merge(items[i], items[i + step]);
    }
  }
}

void check_finite(const std::vector<double>& v, double extra) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ComputeError("non-finite parameters");
  }
  if (!std::isfinite(extra)) throw ComputeError("non-finite parameters");
}

struct TableCounts {
  const std::uint32_t* table;
  int cols;
  const std::uint32_t* row(std::uint64_t s, std::uint32_t*) const {
    return table + s * std::uint64_t(cols);
  }
};

struct ScanCounts {
  const std::vector<CoreSystem::MaskClique>* cliques;
  int cols;
  const std::uint32_t* row(std::uint64_t s, std::uint32_t* buf) const {
    std::fill(buf, buf + cols, 0u);
    for (const auto& c : *cliques) {
      if ((s & c.mask) == c.mask) ++buf[c.triangle ? cols - 1 : c.size - 2];
    }
    return buf;
  }
};

struct HerCoreResult {
  double log_z = 0.0;            // emax + log(sum of shifted weights)
  double popcount_expect = 0.0;  // E of |S'| under the core distribution
  std::vector<double> col_expect;
};

// coeffs[c] multiplies count column c (star sizes 2..d, then triangles).
template <class Counts>
double her_energy(std::uint64_t s, double q1, const std::vector<double>& coeffs,
                  const Counts& counts, std::uint32_t* buf) {
  const std::uint32_t* row = counts.row(s, buf);
  double e = q1 * double(std::popcount(s));
  for (std::size_t c = 0; c < coeffs.size(); ++c) e += coeffs[c] * double(row[c]);
  return e;
}

template <class Counts>
HerCoreResult her_core_reference(int core_size, double q1,
                                 const std::vector<double>& coeffs,
                                 const Counts& counts) {
  const std::uint64_t n_subsets = std::uint64_t(1) << core_size;
  const int cols = int(coeffs.size());
  std::uint32_t buf[40];

  double emax = -std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < n_subsets; ++s) {
    emax = std::max(emax, her_energy(s, q1, coeffs, counts, buf));
  }

  double z = 0.0;
  double pc = 0.0;
  std::vector<double> acc(std::size_t(cols), 0.0);
  for (std::uint64_t s = 0; s < n_subsets; ++s) {
    const std::uint32_t* row = counts.row(s, buf);
    double e = q1 * double(std::popcount(s));
    for (int c = 0; c < cols; ++c) e += coeffs[std::size_t(c)] * double(row[c]);
    const double w = std::exp(e - emax);
    z += w;
    pc += w * double(std::popcount(s));
    for (int c = 0; c < cols; ++c) acc[std::size_t(c)] += w * double(row[c]);
  }

  HerCoreResult out;
  out.log_z = emax + std::log(z);
  out.popcount_expect = pc / z;
  out.col_expect.resize(std::size_t(cols));
  for (int c = 0; c < cols; ++c) out.col_expect[std::size_t(c)] = acc[std::size_t(c)] / z;
  return out;
}

template <class Counts>
HerCoreResult her_core_parallel(int core_size, double q1,
                                const std::vector<double>& coeffs,
                                const Counts& counts) {
  const std::uint64_t n_subsets = std::uint64_t(1) << core_size;
  const std::uint64_t nchunks = (n_subsets + kChunk - 1) >> kChunkBits;
  const int cols = int(coeffs.size());
  const int workers = worker_count();

  std::vector<double> chunk_max(std::size_t(nchunks),
                                -std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static) num_threads(workers) if (nchunks > 1)
  for (std::int64_t c = 0; c < std::int64_t(nchunks); ++c) {
    std::uint32_t buf[40];
    const std::uint64_t lo = std::uint64_t(c) << kChunkBits;
    const std::uint64_t hi = std::min(n_subsets, lo + kChunk);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::uint64_t s = lo; s < hi; ++s) {
      mx = std::max(mx, her_energy(s, q1, coeffs, counts, buf));
    }
    chunk_max[std::size_t(c)] = mx;
  }
  double emax = chunk_max[0];
  for (double mx : chunk_max) emax = std::max(emax, mx);

  struct Partial {
    double z = 0.0;
    double pc = 0.0;
    std::vector<double> acc;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static) num_threads(workers) if (nchunks > 1)
  for (std::int64_t c = 0; c < std::int64_t(nchunks); ++c) {
    std::uint32_t buf[40];
    Partial part;
    part.acc.assign(std::size_t(cols), 0.0);
    const std::uint64_t lo = std::uint64_t(c) << kChunkBits;
    const std::uint64_t hi = std::min(n_subsets, lo + kChunk);
    for (std::uint64_t s = lo; s < hi; ++s) {
      const std::uint32_t* row = counts.row(s, buf);
      double e = q1 * double(std::popcount(s));
      for (int k = 0; k < cols; ++k) e += coeffs[std::size_t(k)] * double(row[k]);
      const double w = std::exp(e - emax);
      part.z += w;
      part.pc += w * double(std::popcount(s));
      for (int k = 0; k < cols; ++k) part.acc[std::size_t(k)] += w * double(row[k]);
    }
    partials[std::size_t(c)] = std::move(part);
  }
  tree_fold(partials, [cols](Partial& a, const Partial& b) {
    a.z += b.z;
    a.pc += b.pc;
    for (int k = 0; k < cols; ++k) a.acc[std::size_t(k)] += b.acc[std::size_t(k)];
  });

  HerCoreResult out;
  out.log_z = emax + std::log(partials[0].z);
  out.popcount_expect = partials[0].pc / partials[0].z;
  out.col_expect.resize(std::size_t(cols));
  for (int k = 0; k < cols; ++k)
    out.col_expect[std::size_t(k)] = partials[0].acc[std::size_t(k)] / partials[0].z;
  return out;
}

struct HBetaCoreResult {
  double log_z = 0.0;
  std::vector<double> coord_expect;  // hbeta_dim(n, d) coordinates
};

// Per-subset energy: first-order terms of the member dyads plus the weight of
// every activated clique of size >= 2.
double hbeta_energy(std::uint64_t s, const std::vector<double>& base1,
                    const std::vector<CoreSystem::MaskClique>& cliques,
                    const std::vector<double>& clique_w) {
  double e = 0.0;
  std::uint64_t bits = s;
  while (bits) {
    const int v = std::countr_zero(bits);
    bits &= bits - 1;
    e += base1[std::size_t(v)];
  }
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    if ((s & cliques[k].mask) == cliques[k].mask) e += clique_w[k];
  }
  return e;
}

struct HBetaAccum {
  double z = 0.0;
  std::vector<double> acc;
};

void hbeta_accumulate(std::uint64_t s, double w, const CoreSystem& core,
                      const std::vector<double>& clique_w, HBetaAccum& out) {
  (void)clique_w;
  const int d = core.d;
  const int n = core.n;
  out.z += w;
  std::uint64_t bits = s;
  while (bits) {
    const int v = std::countr_zero(bits);
    bits &= bits - 1;
    const auto [i, j] = core.core_ends[std::size_t(v)];
    out.acc[std::size_t(hbeta_coord(i, 1, d))] += w;
    out.acc[std::size_t(hbeta_coord(j, 1, d))] += w;
  }
  for (const auto& c : core.cliques) {
    if ((s & c.mask) != c.mask) continue;
    if (c.triangle) {
      for (int node : c.tri_nodes) out.acc[std::size_t(hbeta_tau_coord(node, n, d))] += w;
    } else {
      out.acc[std::size_t(hbeta_coord(c.hub, c.size, d))] += w;
    }
  }
}

HBetaCoreResult hbeta_core_reference(const CoreSystem& core,
                                     const std::vector<double>& base1,
                                     const std::vector<double>& clique_w) {
  const std::uint64_t n_subsets = core.num_subsets();
  double emax = -std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < n_subsets; ++s) {
    emax = std::max(emax, hbeta_energy(s, base1, core.cliques, clique_w));
  }
  HBetaAccum total;
  total.acc.assign(std::size_t(hbeta_dim(core.n, core.d)), 0.0);
  for (std::uint64_t s = 0; s < n_subsets; ++s) {
    const double w = std::exp(hbeta_energy(s, base1, core.cliques, clique_w) - emax);
    hbeta_accumulate(s, w, core, clique_w, total);
  }
  HBetaCoreResult out;
  out.log_z = emax + std::log(total.z);
  out.coord_expect.resize(total.acc.size());
  for (std::size_t k = 0; k < total.acc.size(); ++k)
    out.coord_expect[k] = total.acc[k] / total.z;
  return out;
}

HBetaCoreResult hbeta_core_parallel(const CoreSystem& core,
                                    const std::vector<double>& base1,
                                    const std::vector<double>& clique_w) {
  const std::uint64_t n_subsets = core.num_subsets();
  const std::uint64_t nchunks = (n_subsets + kChunk - 1) >> kChunkBits;
  const int workers = worker_count();

  std::vector<double> chunk_max(std::size_t(nchunks),
                                -std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static) num_threads(workers) if (nchunks > 1)
  for (std::int64_t c = 0; c < std::int64_t(nchunks); ++c) {
    const std::uint64_t lo = std::uint64_t(c) << kChunkBits;
    const std::uint64_t hi = std::min(n_subsets, lo + kChunk);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::uint64_t s = lo; s < hi; ++s) {
      mx = std::max(mx, hbeta_energy(s, base1, core.cliques, clique_w));
    }
    chunk_max[std::size_t(c)] = mx;
  }
  double emax = chunk_max[0];
  for (double mx : chunk_max) emax = std::max(emax, mx);

  std::vector<HBetaAccum> partials(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static) num_threads(workers) if (nchunks > 1)
  for (std::int64_t c = 0; c < std::int64_t(nchunks); ++c) {
    HBetaAccum part;
    part.acc.assign(std::size_t(hbeta_dim(core.n, core.d)), 0.0);
    const std::uint64_t lo = std::uint64_t(c) << kChunkBits;
    const std::uint64_t hi = std::min(n_subsets, lo + kChunk);
    for (std::uint64_t s = lo; s < hi; ++s) {
      const double w = std::exp(hbeta_energy(s, base1, core.cliques, clique_w) - emax);
      hbeta_accumulate(s, w, core, clique_w, part);
    }
    partials[std::size_t(c)] = std::move(part);
  }
  tree_fold(partials, [](HBetaAccum& a, const HBetaAccum& b) {
    a.z += b.z;
    for (std::size_t k = 0; k < a.acc.size(); ++k) a.acc[k] += b.acc[k];
  });

  HBetaCoreResult out;
  out.log_z = emax + std::log(partials[0].z);
  out.coord_expect.resize(partials[0].acc.size());
  for (std::size_t k = 0; k < partials[0].acc.size(); ++k)
    out.coord_expect[k] = partials[0].acc[k] / partials[0].z;
  return out;
}

}  // namespace

int worker_count() {
#ifdef _OPENMP
  static const int env_cap = [] {
    const char* s = std::getenv("HIERNET_THREADS");
    if (!s || !*s) return 0;
    const long v = std::strtol(s, nullptr, 10);
    return v > 0 ? int(v) : 0;
  }();
  int workers = omp_get_max_threads();
  if (env_cap > 0) workers = std::min(workers, env_cap);
  return std::max(1, workers);
#else
  return 1;
#endif
}

CoreSystem::CoreSystem(const CliqueCatalog& catalog, const CoreDecomposition& decomp,
                       CoreSystemOptions options) {
  if (catalog.n != decomp.n || catalog.m != decomp.m) {
    throw ValidationError("catalog and core decomposition disagree on dimensions");
  }
  if (options.core_cap > 30) options.core_cap = 30;
  if (decomp.core_size > options.core_cap) {
    throw ComputeError("core has " + std::to_string(decomp.core_size) +
                       " non-isolated dyads, above the cap of " +
                       std::to_string(options.core_cap) +
                       " (raise --core-cap to allow 2^" +
                       std::to_string(decomp.core_size) + " enumeration)");
  }
  n = catalog.n;
  m = catalog.m;
  core_size = decomp.core_size;
  d = catalog.d;
  has_triangles = catalog.has_triangles;
  stat_cols = (d >= 2 ? d - 1 : 0) + 1;

  for (int dy : decomp.core_dyads) {
    const auto e = dyad_from_index(dy, n);
    core_ends.emplace_back(e.first - 1, e.second - 1);
  }
  for (int dy : decomp.isolated_dyads) {
    const auto e = dyad_from_index(dy, n);
    isolated_ends.emplace_back(e.first - 1, e.second - 1);
  }

  for (const Clique& c : catalog.cliques) {
    if (c.size() < 2) continue;
    MaskClique mc;
    mc.size = c.size();
    mc.hub = c.hub;
    mc.triangle = c.kind == CliqueKind::Triangle;
    mc.tri_nodes = c.tri_nodes;
    for (int dy : c.dyads) {
      const int pos = decomp.core_pos[std::size_t(dy)];
      if (pos < 0) throw ValidationError("clique member outside the core");
      mc.mask |= std::uint64_t(1) << pos;
    }
    cliques.push_back(mc);
  }

  // Per-subset clique counts by size, built with a subset-sum (zeta)
  // transform per column. Skipped when the table would blow the budget; the
  // evaluators then rescan the clique list per subset.
  const std::uint64_t n_subsets = num_subsets();
  const std::uint64_t table_bytes = n_subsets * std::uint64_t(stat_cols) * 4;
  const std::uint64_t scratch_bytes = n_subsets * 4;
  if (core_size > 0 && !cliques.empty() &&
      table_bytes + scratch_bytes <= options.mem_budget_bytes) {
    counts.assign(n_subsets * std::uint64_t(stat_cols), 0u);
    std::vector<std::uint32_t> col(n_subsets);
    const int workers = worker_count();
    for (int c = 0; c < stat_cols; ++c) {
      std::fill(col.begin(), col.end(), 0u);
      for (const auto& mc : cliques) {
        const int col_of = mc.triangle ? stat_cols - 1 : mc.size - 2;
        if (col_of == c) ++col[mc.mask];
      }
      for (int b = 0; b < core_size; ++b) {
        const std::uint64_t bit = std::uint64_t(1) << b;
#pragma omp parallel for schedule(static) num_threads(workers)
        for (std::int64_t s = 0; s < std::int64_t(n_subsets); ++s) {
          if (std::uint64_t(s) & bit) col[std::size_t(s)] += col[std::size_t(s) ^ bit];
        }
      }
#pragma omp parallel for schedule(static) num_threads(workers)
      for (std::int64_t s = 0; s < std::int64_t(n_subsets); ++s) {
        counts[std::uint64_t(s) * std::uint64_t(stat_cols) + std::uint64_t(c)] =
            col[std::size_t(s)];
      }
    }
    has_count_table = true;
  }
}

LogPartition psi_her(const HERParams& params, const CoreSystem& core,
                     EvalBackend backend) {
  const int d = core.d;
  const std::vector<double> theta = her_param_vec(params, d);
  check_finite(theta, 0.0);
  const double q1 = theta[0];

  std::vector<double> coeffs(std::size_t(core.stat_cols), 0.0);
  for (int r = 2; r <= d; ++r) coeffs[std::size_t(r - 2)] = theta[std::size_t(r - 1)];
  coeffs[std::size_t(core.stat_cols - 1)] = theta[std::size_t(d)];

  HerCoreResult res;
  if (core.has_count_table) {
    TableCounts provider{core.counts.data(), core.stat_cols};
    res = backend == EvalBackend::Reference
              ? her_core_reference(core.core_size, q1, coeffs, provider)
              : her_core_parallel(core.core_size, q1, coeffs, provider);
  } else {
    ScanCounts provider{&core.cliques, core.stat_cols};
    res = backend == EvalBackend::Reference
              ? her_core_reference(core.core_size, q1, coeffs, provider)
              : her_core_parallel(core.core_size, q1, coeffs, provider);
  }

  const int isolated = core.m - core.core_size;
  LogPartition out;
  out.value = double(isolated) * log1pexp(q1) + res.log_z;
  out.expectations.assign(std::size_t(her_dim(d)), 0.0);
  out.expectations[0] = double(isolated) * sigmoid(q1) + res.popcount_expect;
  for (int r = 2; r <= d; ++r)
    out.expectations[std::size_t(r - 1)] = res.col_expect[std::size_t(r - 2)];
  out.expectations[std::size_t(d)] = res.col_expect[std::size_t(core.stat_cols - 1)];
  return out;
}

LogPartition psi_hbeta(const HBetaParams& params, const CoreSystem& core,
                       EvalBackend backend) {
  if (params.n != core.n) throw ValidationError("beta parameters have the wrong node count");
  if (params.d > core.d) throw ValidationError("beta parameters exceed the catalog's max star size");
  if (int(params.tau.size()) != core.n) throw ValidationError("tau has the wrong length");
  check_finite(params.beta, 0.0);
  check_finite(params.tau, 0.0);

  const int d = core.d;
  auto beta_at = [&](int node, int r) -> double {
    if (r > params.d) return 0.0;
    return params.beta[std::size_t(node) * params.d + (r - 1)];
  };

  std::vector<double> base1(std::size_t(core.core_size), 0.0);
  for (int v = 0; v < core.core_size; ++v) {
    const auto [i, j] = core.core_ends[std::size_t(v)];
    base1[std::size_t(v)] = beta_at(i, 1) + beta_at(j, 1);
  }
  std::vector<double> clique_w(core.cliques.size(), 0.0);
  for (std::size_t k = 0; k < core.cliques.size(); ++k) {
    const auto& c = core.cliques[k];
    if (c.triangle) {
      clique_w[k] = params.tau[std::size_t(c.tri_nodes[0])] +
                    params.tau[std::size_t(c.tri_nodes[1])] +
                    params.tau[std::size_t(c.tri_nodes[2])];
    } else {
      clique_w[k] = beta_at(c.hub, c.size);
    }
  }

  const HBetaCoreResult res = backend == EvalBackend::Reference
                                  ? hbeta_core_reference(core, base1, clique_w)
                                  : hbeta_core_parallel(core, base1, clique_w);

  LogPartition out;
  out.value = res.log_z;
  out.expectations = res.coord_expect;
  for (const auto& [i, j] : core.isolated_ends) {
    const double s = beta_at(i, 1) + beta_at(j, 1);
    out.value += log1pexp(s);
    const double p = sigmoid(s);
    out.expectations[std::size_t(hbeta_coord(i, 1, d))] += p;
    out.expectations[std::size_t(hbeta_coord(j, 1, d))] += p;
  }
  return out;
}

LogPartition psi_her_bruteforce(const HERParams& params, const CliqueCatalog& catalog) {
  if (catalog.m > 25) {
    throw ComputeError("brute-force enumeration limited to m <= 25, got m=" +
                       std::to_string(catalog.m));
  }
  const int d = catalog.d;
  const std::vector<double> theta = her_param_vec(params, d);
  check_finite(theta, 0.0);

  struct MaskedClique {
    std::uint32_t mask;
    int coord;  // index in the flat HER layout
  };
  std::vector<MaskedClique> masked;
  for (const Clique& c : catalog.cliques) {
    if (c.size() < 2) continue;
    std::uint32_t mask = 0;
    for (int dy : c.dyads) mask |= std::uint32_t(1) << dy;
    const int coord = c.kind == CliqueKind::Triangle ? d : c.size() - 1;
    masked.push_back({mask, coord});
  }

  const std::uint64_t n_nets = std::uint64_t(1) << catalog.m;
  auto energy = [&](std::uint64_t x) {
    double e = theta[0] * double(std::popcount(x));
    for (const auto& mc : masked) {
      if ((x & mc.mask) == mc.mask) e += theta[std::size_t(mc.coord)];
    }
    return e;
  };

  double emax = -std::numeric_limits<double>::infinity();
  for (std::uint64_t x = 0; x < n_nets; ++x) emax = std::max(emax, energy(x));

  double z = 0.0;
  std::vector<double> acc(std::size_t(her_dim(d)), 0.0);
  for (std::uint64_t x = 0; x < n_nets; ++x) {
    const double w = std::exp(energy(x) - emax);
    z += w;
    acc[0] += w * double(std::popcount(x));
    for (const auto& mc : masked) {
      if ((x & mc.mask) == mc.mask) acc[std::size_t(mc.coord)] += w;
    }
  }

  LogPartition out;
  out.value = emax + std::log(z);
  out.expectations.resize(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out.expectations[k] = acc[k] / z;
  return out;
}

LogPartition psi_hbeta_bruteforce(const HBetaParams& params, const CliqueCatalog& catalog) {
  if (catalog.m > 25) {
    throw ComputeError("brute-force enumeration limited to m <= 25, got m=" +
                       std::to_string(catalog.m));
  }
  if (params.n != catalog.n) throw ValidationError("beta parameters have the wrong node count");
  if (params.d > catalog.d) throw ValidationError("beta parameters exceed the catalog's max star size");
  check_finite(params.beta, 0.0);
  check_finite(params.tau, 0.0);

  const int n = catalog.n;
  const int d = catalog.d;
  auto beta_at = [&](int node, int r) -> double {
    if (r > params.d) return 0.0;
    return params.beta[std::size_t(node) * params.d + (r - 1)];
  };

  std::vector<double> dyad_w(std::size_t(catalog.m), 0.0);
  std::vector<std::pair<int, int>> dyad_ends(std::size_t(catalog.m));
  for (int dy = 0; dy < catalog.m; ++dy) {
    const auto e = dyad_from_index(dy, n);
    dyad_ends[std::size_t(dy)] = {e.first - 1, e.second - 1};
    dyad_w[std::size_t(dy)] = beta_at(e.first - 1, 1) + beta_at(e.second - 1, 1);
  }

  struct MaskedClique {
    std::uint32_t mask;
    double w;
    int coord;
    bool triangle;
    std::array<int, 3> tri_nodes;
  };
  std::vector<MaskedClique> masked;
  for (const Clique& c : catalog.cliques) {
    if (c.size() < 2) continue;
    MaskedClique mc{};
    for (int dy : c.dyads) mc.mask |= std::uint32_t(1) << dy;
    mc.triangle = c.kind == CliqueKind::Triangle;
    mc.tri_nodes = c.tri_nodes;
    if (mc.triangle) {
      mc.w = params.tau[std::size_t(c.tri_nodes[0])] + params.tau[std::size_t(c.tri_nodes[1])] +
             params.tau[std::size_t(c.tri_nodes[2])];
      mc.coord = -1;
    } else {
      mc.w = beta_at(c.hub, c.size());
      mc.coord = hbeta_coord(c.hub, c.size(), d);
    }
    masked.push_back(mc);
  }

  const std::uint64_t n_nets = std::uint64_t(1) << catalog.m;
  auto energy = [&](std::uint64_t x) {
    double e = 0.0;
    std::uint64_t bits = x;
    while (bits) {
      const int dy = std::countr_zero(bits);
      bits &= bits - 1;
      e += dyad_w[std::size_t(dy)];
    }
    for (const auto& mc : masked) {
      if ((x & mc.mask) == mc.mask) e += mc.w;
    }
    return e;
  };

  double emax = -std::numeric_limits<double>::infinity();
  for (std::uint64_t x = 0; x < n_nets; ++x) emax = std::max(emax, energy(x));

  double z = 0.0;
  std::vector<double> acc(std::size_t(hbeta_dim(n, d)), 0.0);
  for (std::uint64_t x = 0; x < n_nets; ++x) {
    const double w = std::exp(energy(x) - emax);
    z += w;
    std::uint64_t bits = x;
    while (bits) {
      const int dy = std::countr_zero(bits);
      bits &= bits - 1;
      acc[std::size_t(hbeta_coord(dyad_ends[std::size_t(dy)].first, 1, d))] += w;
      acc[std::size_t(hbeta_coord(dyad_ends[std::size_t(dy)].second, 1, d))] += w;
    }
    for (const auto& mc : masked) {
      if ((x & mc.mask) != mc.mask) continue;
      if (mc.triangle) {
        for (int node : mc.tri_nodes) acc[std::size_t(hbeta_tau_coord(node, n, d))] += w;
      } else {
        acc[std::size_t(mc.coord)] += w;
      }
    }
  }

  LogPartition out;
  out.value = emax + std::log(z);
  out.expectations.resize(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out.expectations[k] = acc[k] / z;
  return out;
}

}  // namespace hiernet
