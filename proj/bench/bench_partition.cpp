// Times the factorized partition-function kernel: serial reference loop vs
// the chunked OpenMP kernel, for growing core sizes. The parallel kernel is
// bit-identical for any worker count, so the speedup is free accuracy-wise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "hiernet/cliques.hpp"
#include "hiernet/partition.hpp"
#include "hiernet/rng.hpp"

using namespace hiernet;

namespace {

double time_once(const HERParams& params, const CoreSystem& core, EvalBackend backend,
                 int reps, double* checksum) {
  const auto start = std::chrono::steady_clock::now();
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    acc += psi_her(params, core, backend).value;
  }
  const auto stop = std::chrono::steady_clock::now();
  *checksum = acc;
  return std::chrono::duration<double>(stop - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int max_core = 20;
  if (argc > 1) max_core = std::atoi(argv[1]);
  if (max_core < 6) max_core = 6;
  if (max_core > 24) max_core = 24;

  std::printf("workers: %d\n", worker_count());
  std::printf("%6s %10s %14s %14s %9s\n", "core", "cliques", "serial[s]", "openmp[s]",
              "speedup");

  RngStream rng(42, 0);
  for (int size = 8; size <= max_core; size += 2) {
    // One clique of `size` dyads around a hub: all subsets of it are cliques,
    // which makes a dense catalog and a heavy per-subset scan.
    const int n = size + 2;
    const DependencyGraph dep = make_disjoint_clique_dep(n, {size});
    const CliqueCatalog catalog = enumerate_cliques(dep);
    const CoreDecomposition decomp = core_decompose(dep);
    const CoreSystem core(catalog, decomp);

    HERParams params;
    params.q.resize(std::size_t(catalog.d));
    for (double& q : params.q) q = rng.uniform(-0.5, 0.5);
    params.t = 0.0;

    const int reps = size <= 16 ? 5 : 1;
    double check_serial = 0.0, check_parallel = 0.0;
    const double t_serial =
        time_once(params, core, EvalBackend::Reference, reps, &check_serial);
    const double t_parallel =
        time_once(params, core, EvalBackend::Parallel, reps, &check_parallel);
    const double rel = std::abs(check_serial - check_parallel) /
                       std::max(1.0, std::abs(check_serial));
    std::printf("%6d %10zu %14.6f %14.6f %8.2fx   (rel diff %.2e)\n", size,
                core.cliques.size(), t_serial, t_parallel, t_serial / t_parallel, rel);
  }
  return 0;
}
