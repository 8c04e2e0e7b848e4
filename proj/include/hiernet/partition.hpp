#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "hiernet/cliques.hpp"
#include "hiernet/params.hpp"

namespace hiernet {

// Reference: plain serial loop kept as the comparison implementation.
// Parallel: OpenMP kernel with a fixed chunk decomposition and a fixed-shape
// reduction tree, so results are bit-identical for any worker count.
enum class EvalBackend { Reference, Parallel };

struct LogPartition {
  double value = 0.0;
  // Statistic expectations, aligned with the model's flat layout:
  // HER [E s^(1)..E s^(d), E s^(t)], HBeta [(node,size) row-major, tau block].
  std::vector<double> expectations;
};

struct CoreSystemOptions {
  int core_cap = 24;                                    // reject larger cores
  std::size_t mem_budget_bytes = std::size_t(512) << 20;  // count-table budget
};

// Precomputed geometry for the factorized partition function: cliques of
// size >= 2 as bitmasks over core positions and, when it fits the memory
// budget, a per-subset table of clique counts by size.
class CoreSystem {
 public:
  struct MaskClique {
    std::uint64_t mask = 0;
    int size = 0;
    int hub = -1;  // 0-based node; -1 for triangles
    bool triangle = false;
    std::array<int, 3> tri_nodes{-1, -1, -1};
  };

  CoreSystem(const CliqueCatalog& catalog, const CoreDecomposition& decomp,
             CoreSystemOptions options = {});

  int n = 0;
  int m = 0;
  int core_size = 0;
  int d = 1;
  bool has_triangles = false;

  std::vector<MaskClique> cliques;                  // size >= 2, deterministic order
  std::vector<std::pair<int, int>> core_ends;       // 0-based endpoints per core position
  std::vector<std::pair<int, int>> isolated_ends;   // 0-based endpoints of isolated dyads

  // Count-table columns: star sizes 2..d, then one triangle column.
  int stat_cols = 1;
  bool has_count_table = false;
  std::vector<std::uint32_t> counts;  // counts[subset * stat_cols + col]

  std::uint64_t num_subsets() const { return std::uint64_t(1) << core_size; }
};

// Exact log-partition and statistic expectations via the core/isolated
// factorization: the isolated dyads contribute (m - m') * log(1 + e^{q1})
// (per-dyad terms for the beta model) and the core contributes a log-sum-exp
// over its 2^m' subsets.
LogPartition psi_her(const HERParams& params, const CoreSystem& core,
                     EvalBackend backend = EvalBackend::Parallel);
LogPartition psi_hbeta(const HBetaParams& params, const CoreSystem& core,
                       EvalBackend backend = EvalBackend::Parallel);

// Brute-force oracles summing over all 2^m networks; require m <= 25.
LogPartition psi_her_bruteforce(const HERParams& params, const CliqueCatalog& catalog);
LogPartition psi_hbeta_bruteforce(const HBetaParams& params, const CliqueCatalog& catalog);

// OpenMP worker count, bounded by the HIERNET_THREADS environment variable.
int worker_count();

}  // namespace hiernet
