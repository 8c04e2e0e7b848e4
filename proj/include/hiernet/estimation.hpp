#pragma once

#include <string>
#include <vector>

#include "hiernet/graph.hpp"
#include "hiernet/partition.hpp"
#include "hiernet/suffstats.hpp"

namespace hiernet {

struct FitOptions {
  double tol = 1e-8;    // convergence threshold on the gradient inf-norm
  int max_iter = 10000;
  double bound = 30.0;  // |parameter| above this while unconverged flags nonexistence
};

enum class FitStatus { Converged, MaxIterations, SuspectNonexistent };

const char* to_string(FitStatus status);

struct FitResult {
  std::vector<double> params;  // flat layout of the fitted model
  double loglik = 0.0;         // total over the pooled sample
  double grad_inf_norm = 0.0;  // of the per-observation objective
  int iterations = 0;
  FitStatus status = FitStatus::MaxIterations;
  std::string warning;  // rank diagnostics; empty when clean
};

double loglik_her(const Network& x, const HERParams& params, const CliqueCatalog& catalog,
                  const CoreSystem& core);
std::vector<double> grad_her(const Network& x, const HERParams& params,
                             const CliqueCatalog& catalog, const CoreSystem& core);
double loglik_hbeta(const Network& x, const HBetaParams& params, const CliqueCatalog& catalog,
                    const CoreSystem& core);
std::vector<double> grad_hbeta(const Network& x, const HBetaParams& params,
                               const CliqueCatalog& catalog, const CoreSystem& core);

// Maximum likelihood by gradient ascent with Armijo backtracking from the
// zero vector. The pooled variants maximize the average log-likelihood of an
// iid sample whose mean statistic vector is given; loglik is scaled by nobs.
FitResult fit_her(const Network& x, const CliqueCatalog& catalog, const CoreSystem& core,
                  const FitOptions& options = {});
FitResult fit_her_pooled(const std::vector<double>& mean_stats, double nobs,
                         const CoreSystem& core, const FitOptions& options = {});
FitResult fit_hbeta(const Network& x, const CliqueCatalog& catalog, const CoreSystem& core,
                    const FitOptions& options = {});
FitResult fit_hbeta_pooled(const std::vector<double>& mean_stats, double nobs,
                           const CliqueCatalog& catalog, const CoreSystem& core,
                           const FitOptions& options = {});

struct ErFit {
  double q_hat = 0.0;
  double loglik = 0.0;
};

// Closed-form Erdos-Renyi MLE; throws ComputeError when the edge count sits
// on the boundary (no finite MLE).
ErFit fit_er(const Network& x);
ErFit fit_er_mean(double mean_edges, int m, double nobs);

struct LRTReport {
  double S = 0.0;
  double loglik_her = 0.0;
  double loglik_er = 0.0;
  int df = 0;
};

// Likelihood ratio of hierarchical Erdos-Renyi against plain Erdos-Renyi.
LRTReport lrt(const Network& x, const DependencyGraph& dep, const FitOptions& options = {},
              const CoreSystemOptions& core_options = {});
LRTReport lrt(const Network& x, const CliqueCatalog& catalog, const CoreSystem& core,
              const FitOptions& options = {});

// Backward edge elimination on the dependency graph: walks the edges of d0 in
// decreasing lexicographic order, refits with each edge removed, and keeps
// the removal unless a chi-square likelihood-ratio test at level alpha
// rejects it. Steps that change no parameter count auto-accept the removal.
DependencyGraph backward_select(const Network& x, const DependencyGraph& d0, double alpha,
                                const FitOptions& options = {},
                                const CoreSystemOptions& core_options = {});
DependencyGraph backward_select(const std::vector<Network>& sample, const DependencyGraph& d0,
                                double alpha, const FitOptions& options = {},
                                const CoreSystemOptions& core_options = {});

}  // namespace hiernet
