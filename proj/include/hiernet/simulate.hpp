#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hiernet/estimation.hpp"
#include "hiernet/graph.hpp"
#include "hiernet/partition.hpp"
#include "hiernet/rng.hpp"

namespace hiernet {

// Latent-Gaussian generator: a unit-diagonal SPD covariance over the m dyad
// coordinates, together with its concentration (inverse). After zero-forcing,
// the concentration vanishes on every missing edge of the dependency graph,
// so the latent Gaussian is Markov to it.
struct LatentGaussianSpec {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd concentration;
  double alpha = 0.0;  // identity-mixing weight that set the correlation strength

  int dim() const { return int(sigma.rows()); }
};

// Unconstrained random SPD matrix: Q Lambda Q^T with Q orthogonal from the QR
// factorization of a standard-normal matrix and a heavy-tailed (log-normal)
// spectrum, normalized to unit diagonal and mixed as (1-alpha) I + alpha R.
// alpha sets the typical correlation magnitude (|rho| <~ alpha) at any
// dimension.
LatentGaussianSpec random_spd(int m, double alpha, RngStream& rng);
LatentGaussianSpec random_spd(int m, double alpha, std::uint64_t seed);

// Cycles through the missing edges of the dependency graph, each step zeroing
// one concentration entry by the equivalent rank-two covariance adjustment,
// until the missing-edge concentrations sum below tol. The result is
// renormalized to unit diagonal.
LatentGaussianSpec enforce_zeros(const LatentGaussianSpec& spec, const DependencyGraph& dep,
                                 double tol = 1e-8, int max_sweeps = 1000);

// Draws latent vectors with covariance sigma and maps each coordinate to
// 1 when nonnegative, 0 when negative.
std::vector<Network> sample_gaussian_threshold(const LatentGaussianSpec& spec, int count,
                                               RngStream& rng);
std::vector<Network> sample_gaussian_threshold(const LatentGaussianSpec& spec, int count,
                                               std::uint64_t seed);

// Exact sampler for the hierarchical Erdos-Renyi model: isolated dyads are
// independent Bernoulli(sigmoid(q1)), the core configuration is drawn from
// the exact categorical distribution over its 2^m' subsets.
std::vector<Network> sample_exact_her(const HERParams& params, const CoreSystem& core,
                                      int count, RngStream& rng);
std::vector<Network> sample_exact_her(const HERParams& params, const CoreSystem& core,
                                      int count, std::uint64_t seed);

struct StudyConfig {
  int n = 0;
  DependencyGraph dep;
  int replicates = 1;
  double alpha_low = 0.1;
  double alpha_high = 0.9;
  std::uint64_t seed = 0;
  FitOptions fit;
  CoreSystemOptions core;
};

struct StudyRecord {
  int replicate = 0;
  double alpha = 0.0;
  double S = 0.0;
  double loglik_her = 0.0;
  double loglik_er = 0.0;
  int df = 0;
  bool discarded = false;
};

struct StudyResult {
  std::vector<StudyRecord> low;   // sorted ascending by S, discarded rows last
  std::vector<StudyRecord> high;
  int discarded_low = 0;
  int discarded_high = 0;
};

// One likelihood-ratio study: per replicate and per correlation level, draw a
// constrained latent-Gaussian spec, threshold one network, fit hierarchical
// and plain Erdos-Renyi, and record S. Replicates whose MLE appears
// nonexistent are recorded as discarded. Replicates own independent RNG
// streams and may execute concurrently.
StudyResult run_study(const StudyConfig& config);

}  // namespace hiernet
