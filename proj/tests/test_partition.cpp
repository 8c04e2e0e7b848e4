#include <cmath>
#include <cstring>
#include <vector>

#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hiernet/numeric.hpp"
#include "hiernet/partition.hpp"
#include "hiernet/suffstats.hpp"
#include "test_helpers.hpp"

using namespace hiernet;
using namespace hiernet::testing;

namespace {

CoreSystem build_core(const DependencyGraph& dep, CoreSystemOptions opts = {}) {
  return CoreSystem(enumerate_cliques(dep), core_decompose(dep), opts);
}

// Closed form for the path graph 12 -- 13 -- 23 on n = 3.
double path_psi_closed(double q, double q2) {
  return std::log(1.0 + 3.0 * std::exp(q) + std::exp(2.0 * q) +
                  2.0 * std::exp(2.0 * q + q2) + std::exp(3.0 * q + 2.0 * q2));
}

// Closed form for the same graph under the beta parameterization; b are the
// first-order node parameters, cap1/cap3 the second-order hub parameters.
double path_psi_hbeta_closed(double b1, double b2, double b3, double cap1, double cap3) {
  const double sum =
      1.0 + std::exp(b1 + b2) + std::exp(b1 + b3) + std::exp(b2 + b3) +
      std::exp(2.0 * b1 + b2 + b3 + cap1) + std::exp(b1 + 2.0 * b2 + b3) +
      std::exp(b1 + b2 + 2.0 * b3 + cap3) +
      std::exp(2.0 * (b1 + b2 + b3) + cap1 + cap3);
  return std::log(sum);
}

HERParams random_her_params(int d, double scale, RngStream& rng, bool with_t) {
  HERParams p;
  p.q.resize(std::size_t(d));
  for (double& q : p.q) q = rng.uniform(-scale, scale);
  p.t = with_t ? rng.uniform(-scale, scale) : 0.0;
  return p;
}

HBetaParams random_hbeta_params(int n, int d, double scale, RngStream& rng) {
  HBetaParams p = HBetaParams::zeros(n, d);
  for (double& b : p.beta) b = rng.uniform(-scale, scale);
  for (double& t : p.tau) t = rng.uniform(-scale, scale);
  return p;
}

}  // namespace

TEST_CASE("path-graph normalizing constant matches the closed form") {
  const DependencyGraph dep = path_dep_n3();
  const CliqueCatalog cat = enumerate_cliques(dep);
  const CoreSystem core = build_core(dep);
  for (double q = -2.0; q <= 2.01; q += 1.0) {
    for (double q2 = -2.0; q2 <= 2.01; q2 += 1.0) {
      HERParams p{{q, q2}, 0.0};
      const double expected = path_psi_closed(q, q2);
      CHECK(close(psi_her_bruteforce(p, cat).value, expected, 1e-12));
      CHECK(close(psi_her(p, core, EvalBackend::Reference).value, expected, 1e-12));
      CHECK(close(psi_her(p, core, EvalBackend::Parallel).value, expected, 1e-12));
    }
  }
}

TEST_CASE("uniform model and Erdos-Renyi reductions") {
  // All parameters zero: psi = m log 2, E edges = m / 2.
  {
    const DependencyGraph dep = path_dep(4);  // m = 6, core 3
    const CoreSystem core = build_core(dep);
    HERParams zero{{0.0, 0.0}, 0.0};
    const LogPartition lp = psi_her(zero, core);
    CHECK(close(lp.value, 6.0 * std::log(2.0), 1e-14));
    CHECK(close(lp.expectations[0], 3.0, 1e-14));
  }
  // Empty dependency graph: psi = m log(1 + e^q).
  {
    const DependencyGraph dep(5, {});
    const CliqueCatalog cat = enumerate_cliques(dep);
    const CoreSystem core = build_core(dep);
    for (double q : {-1.5, -0.2, 0.7, 2.0}) {
      HERParams p{{q}, 0.0};
      const double expected = 10.0 * log1pexp(q);
      CHECK(close(psi_her(p, core).value, expected, 1e-14));
      CHECK(close(psi_her_bruteforce(p, cat).value, expected, 1e-12));
    }
  }
}

TEST_CASE("beta-model normalizing constants for the path graph") {
  const DependencyGraph dep = path_dep_n3();
  const CliqueCatalog cat = enumerate_cliques(dep);
  const CoreSystem core = build_core(dep);
  RngStream rng(77, 0);
  for (int trial = 0; trial < 20; ++trial) {
    HBetaParams p = HBetaParams::zeros(3, 2);
    for (double& b : p.beta) b = rng.uniform(-2.0, 2.0);
    // Only hubs 1 and 3 own a second-order clique; zero the rest to match the
    // closed form exactly.
    p.beta_at(1, 2) = 0.0;
    const double expected = path_psi_hbeta_closed(p.beta_at(0, 1), p.beta_at(1, 1),
                                                  p.beta_at(2, 1), p.beta_at(0, 2),
                                                  p.beta_at(2, 2));
    CHECK(close(psi_hbeta_bruteforce(p, cat).value, expected, 1e-12));
    CHECK(close(psi_hbeta(p, core, EvalBackend::Reference).value, expected, 1e-12));
    CHECK(close(psi_hbeta(p, core, EvalBackend::Parallel).value, expected, 1e-12));
  }

  // Zero parameters: uniform.
  CHECK(close(psi_hbeta(HBetaParams::zeros(3, 2), core).value, 3.0 * std::log(2.0), 1e-14));

  // First-order only: the plain beta model constant.
  {
    HBetaParams p = HBetaParams::zeros(3, 2);
    p.beta_at(0, 1) = 0.4;
    p.beta_at(1, 1) = -0.9;
    p.beta_at(2, 1) = 1.3;
    double expected = 0.0;
    for (int i = 1; i <= 3; ++i)
      for (int j = i + 1; j <= 3; ++j)
        expected += log1pexp(p.beta_at(i - 1, 1) + p.beta_at(j - 1, 1));
    CHECK(close(psi_hbeta(p, core).value, expected, 1e-13));
  }

  // Isolated-only dependency graph: beta model exactly, any n.
  {
    const DependencyGraph empty(4, {});
    const CoreSystem ecore = build_core(empty);
    HBetaParams p = HBetaParams::zeros(4, 1);
    for (double& b : p.beta) b = rng.uniform(-1.5, 1.5);
    double expected = 0.0;
    for (int i = 1; i <= 4; ++i)
      for (int j = i + 1; j <= 4; ++j)
        expected += log1pexp(p.beta_at(i - 1, 1) + p.beta_at(j - 1, 1));
    const LogPartition lp = psi_hbeta(p, ecore);
    CHECK(close(lp.value, expected, 1e-13));
    // Degree expectations at zero parameters are (n-1)/2.
    const LogPartition uniform = psi_hbeta(HBetaParams::zeros(4, 1), ecore);
    for (int i = 0; i < 4; ++i)
      CHECK(close(uniform.expectations[std::size_t(hbeta_coord(i, 1, 1))], 1.5, 1e-13));
  }
}

TEST_CASE("factorized evaluation agrees with brute force on random graphs") {
  RngStream rng(101, 0);
  int done = 0;
  while (done < 50) {
    const int n = 3 + int(rng.next_u64() % 3);  // m in {3, 6, 10}
    const DependencyGraph dep = random_valid_dep(n, 0.45, rng);
    const CliqueCatalog cat = enumerate_cliques(dep);
    const CoreSystem core = build_core(dep);

    const HERParams hp = random_her_params(cat.d, 3.0, rng, cat.has_triangles);
    const LogPartition oracle = psi_her_bruteforce(hp, cat);
    for (EvalBackend backend : {EvalBackend::Reference, EvalBackend::Parallel}) {
      const LogPartition fast = psi_her(hp, core, backend);
      CHECK(close(fast.value, oracle.value, 1e-10));
      REQUIRE(fast.expectations.size() == oracle.expectations.size());
      for (std::size_t k = 0; k < oracle.expectations.size(); ++k)
        CHECK(close(fast.expectations[k], oracle.expectations[k], 1e-8));
    }

    const HBetaParams bp = random_hbeta_params(n, cat.d, 2.0, rng);
    const LogPartition boracle = psi_hbeta_bruteforce(bp, cat);
    const LogPartition bfast = psi_hbeta(bp, core);
    CHECK(close(bfast.value, boracle.value, 1e-10));
    REQUIRE(bfast.expectations.size() == boracle.expectations.size());
    for (std::size_t k = 0; k < boracle.expectations.size(); ++k)
      CHECK(close(bfast.expectations[k], boracle.expectations[k], 1e-8));
    ++done;
  }
}

TEST_CASE("expectations are the psi gradient (finite differences)") {
  RngStream rng(303, 0);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4;
    const DependencyGraph dep = random_valid_dep(n, 0.5, rng);
    const CliqueCatalog cat = enumerate_cliques(dep);
    const CoreSystem core = build_core(dep);
    const HERParams hp = random_her_params(cat.d, 1.5, rng, cat.has_triangles);
    const LogPartition lp = psi_her(hp, core);
    const std::vector<double> theta = her_param_vec(hp, cat.d);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      std::vector<double> up = theta, dn = theta;
      up[k] += h;
      dn[k] -= h;
      const double fd = (psi_her(her_params_from_vec(up), core).value -
                         psi_her(her_params_from_vec(dn), core).value) /
                        (2.0 * h);
      CHECK(close(lp.expectations[k], fd, 1e-6));
    }

    const HBetaParams bp = random_hbeta_params(n, cat.d, 1.0, rng);
    const LogPartition blp = psi_hbeta(bp, core);
    std::vector<double> btheta = hbeta_param_vec(bp);
    for (std::size_t k = 0; k < btheta.size(); k += 3) {
      std::vector<double> up = btheta, dn = btheta;
      up[k] += h;
      dn[k] -= h;
      const double fd = (psi_hbeta(hbeta_params_from_vec(up, n, cat.d), core).value -
                         psi_hbeta(hbeta_params_from_vec(dn, n, cat.d), core).value) /
                        (2.0 * h);
      CHECK(close(blp.expectations[k], fd, 1e-6));
    }
  }
}

TEST_CASE("psi is convex and shifts monotonically in q1") {
  RngStream rng(404, 0);
  const DependencyGraph dep = random_valid_dep(4, 0.5, rng);
  const CliqueCatalog cat = enumerate_cliques(dep);
  const CoreSystem core = build_core(dep);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> a =
        her_param_vec(random_her_params(cat.d, 2.0, rng, true), cat.d);
    const std::vector<double> b =
        her_param_vec(random_her_params(cat.d, 2.0, rng, true), cat.d);
    std::vector<double> mid(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) mid[k] = 0.5 * (a[k] + b[k]);
    const double lhs = psi_her(her_params_from_vec(mid), core).value;
    const double rhs = 0.5 * psi_her(her_params_from_vec(a), core).value +
                       0.5 * psi_her(her_params_from_vec(b), core).value;
    CHECK(lhs <= rhs + 1e-10);

    // 0 <= psi(q1 + delta) - psi(q1) <= m * delta for delta > 0.
    const double delta = rng.uniform(0.1, 1.0);
    std::vector<double> shifted = a;
    shifted[0] += delta;
    const double diff = psi_her(her_params_from_vec(shifted), core).value -
                        psi_her(her_params_from_vec(a), core).value;
    CHECK(diff >= 0.0);
    CHECK(diff <= double(dep.m()) * delta + 1e-10);
  }
}

TEST_CASE("binomial convolution form of the denominator") {
  // The isolated dyads enter psi as (1 + e^q1)^(m - m'), which expands into
  // the binomial convolution over network sizes; evaluate that series
  // directly as an oracle.
  auto binomial = [](int a, int b) -> double {
    if (b < 0 || b > a) return 0.0;
    double r = 1.0;
    for (int k = 0; k < b; ++k) r = r * double(a - k) / double(k + 1);
    return r;
  };
  for (const DependencyGraph& dep : {path_dep_n3(), path_dep(4)}) {
    const CliqueCatalog cat = enumerate_cliques(dep);
    const CoreDecomposition dec = core_decompose(dep);
    const CoreSystem core(cat, dec);
    const int m = dep.m();
    const int mp = dec.core_size;
    RngStream rng(505, 0);
    for (int trial = 0; trial < 10; ++trial) {
      const HERParams p = random_her_params(cat.d, 1.5, rng, false);
      // Group core subsets by size r'' and convolve with the isolated counts.
      double total = 0.0;
      for (std::uint64_t s = 0; s < (std::uint64_t(1) << mp); ++s) {
        double inner = 0.0;
        for (const auto& c : core.cliques) {
          if ((s & c.mask) == c.mask && !c.triangle)
            inner += p.q[std::size_t(c.size - 1)];
        }
        const int rpp = std::popcount(s);
        for (int r = rpp; r <= m; ++r) {
          total += binomial(m - mp, r - rpp) *
                   std::exp(double(r) * p.q[0] + inner);
        }
      }
      CHECK(close(psi_her(p, core).value, std::log(total), 1e-12));
    }
  }
}

TEST_CASE("count table and rescan paths give identical energies") {
  RngStream rng(606, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const DependencyGraph dep = random_valid_dep(4, 0.6, rng);
    const CliqueCatalog cat = enumerate_cliques(dep);
    const CoreDecomposition dec = core_decompose(dep);
    const CoreSystem with_table(cat, dec);
    CoreSystemOptions no_table;
    no_table.mem_budget_bytes = 0;
    const CoreSystem scan_only(cat, dec, no_table);
    CHECK(with_table.has_count_table);
    CHECK_FALSE(scan_only.has_count_table);

    const HERParams p = random_her_params(cat.d, 2.5, rng, cat.has_triangles);
    const LogPartition a = psi_her(p, with_table, EvalBackend::Parallel);
    const LogPartition b = psi_her(p, scan_only, EvalBackend::Parallel);
    CHECK(a.value == b.value);  // same integer counts, same order: bit-equal
    CHECK(a.expectations == b.expectations);
  }
}

TEST_CASE("parallel kernel is bit-identical across worker counts") {
#ifdef _OPENMP
  const DependencyGraph dep = make_disjoint_clique_dep(20, {10});
  const CoreSystem core = build_core(dep);
  RngStream rng(707, 0);
  HERParams p = random_her_params(core.d, 1.0, rng, false);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const LogPartition one = psi_her(p, core, EvalBackend::Parallel);
  omp_set_num_threads(2);
  const LogPartition two = psi_her(p, core, EvalBackend::Parallel);
  omp_set_num_threads(saved);

  CHECK(one.value == two.value);
  CHECK(one.expectations == two.expectations);

  // The plain serial loop agrees to rounding.
  const LogPartition ref = psi_her(p, core, EvalBackend::Reference);
  CHECK(close(ref.value, one.value, 1e-13));
#endif
}

TEST_CASE("large sparse graph: isolated dyads factor out exactly") {
  // One 16-clique around node 1 inside n = 50 (m' = 16, 1209 isolated dyads)
  // against the same core inside n = 17 (120 isolated dyads): psi differs by
  // exactly (1209 - 120) log(1 + e^q1).
  const DependencyGraph big = make_disjoint_clique_dep(50, {16});
  const DependencyGraph small = make_disjoint_clique_dep(17, {16});
  const CoreSystem big_core = build_core(big);
  const CoreSystem small_core = build_core(small);
  REQUIRE(big_core.core_size == 16);
  REQUIRE(small_core.core_size == 16);

  RngStream rng(808, 0);
  HERParams p = random_her_params(big_core.d, 0.5, rng, false);
  const LogPartition lp_big = psi_her(p, big_core);
  const LogPartition lp_small = psi_her(p, small_core);
  const double iso_gap = double(big_core.m - small_core.m) * log1pexp(p.q[0]);
  CHECK(close(lp_big.value, lp_small.value + iso_gap, 1e-12));
  const double e_gap = double(big_core.m - small_core.m) * sigmoid(p.q[0]);
  CHECK(close(lp_big.expectations[0], lp_small.expectations[0] + e_gap, 1e-12));
  for (int r = 2; r <= big_core.d; ++r)
    CHECK(close(lp_big.expectations[std::size_t(r - 1)],
                lp_small.expectations[std::size_t(r - 1)], 1e-12));
}

TEST_CASE("core cap is enforced") {
  const DependencyGraph dep = make_disjoint_clique_dep(30, {12});
  CoreSystemOptions opts;
  opts.core_cap = 10;
  CHECK_THROWS_AS(build_core(dep, opts), ComputeError);
}

TEST_CASE("non-finite parameters are rejected") {
  const CoreSystem core = build_core(path_dep_n3());
  HERParams p{{std::nan(""), 0.0}, 0.0};
  CHECK_THROWS_AS(psi_her(p, core), ComputeError);
}
