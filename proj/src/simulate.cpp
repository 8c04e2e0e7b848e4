#include "hiernet/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "hiernet/numeric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hiernet {

namespace {

int network_size_from_dim(int m) {
  const int n = int(std::lround((1.0 + std::sqrt(1.0 + 8.0 * double(m))) / 2.0));
  if (dyad_count(n) != m) {
    throw ValidationError("latent dimension " + std::to_string(m) +
                          " is not a dyad count n*(n-1)/2");
  }
  return n;
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw ComputeError(std::string(what) + ": matrix is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

// One pass of the zero-forcing cycle in concentration space. For a missing
// pair (a, b), the covariance-space step replaces sigma(a,b) by the value
// implied by conditional independence given the rest; on the concentration
// side that is a rank-two update that zeroes K(a,b) and keeps the conditional
// variances of a and b. Returns the constrained covariance and concentration.
struct ZeroForced {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd concentration;
  int sweeps = 0;
};

ZeroForced zero_force(const Eigen::MatrixXd& sigma,
                      const std::vector<std::pair<int, int>>& missing, double tol,
                      int max_sweeps, bool renormalize) {
  ZeroForced out;
  if (missing.empty()) {
    out.sigma = sigma;
    out.concentration = invert_spd(sigma, "zero-forcing input");
    return out;
  }
  const Eigen::Index m = sigma.rows();
  Eigen::MatrixXd k = invert_spd(sigma, "zero-forcing input");

  Eigen::VectorXd p(m), q(m);
  bool converged = false;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (const auto& [a, b] : missing) {
      const double kaa = k(a, a), kab = k(a, b), kbb = k(b, b);
      const double det2 = kaa * kbb - kab * kab;
      if (!(det2 > 0.0) || !(kaa > 0.0) || !(kbb > 0.0)) {
        throw ComputeError("zero-forcing lost positive definiteness");
      }
      // Conditional covariance of {a, b} given the rest.
      const double g11 = kbb / det2, g22 = kaa / det2, g12 = -kab / det2;
      // New inverse-conditional block minus the old one.
      const double d11 = -kab * kab / kbb;
      const double d22 = -kab * kab / kaa;
      const double d12 = -kab;
      // T = G * Delta * G
      const double t11 = g11 * (d11 * g11 + d12 * g12) + g12 * (d12 * g11 + d22 * g12);
      const double t12 = g11 * (d11 * g12 + d12 * g22) + g12 * (d12 * g12 + d22 * g22);
      const double t22 = g12 * (d11 * g12 + d12 * g22) + g22 * (d12 * g12 + d22 * g22);
      p = k.col(a);
      q = k.col(b);
      k.noalias() += t11 * (p * p.transpose());
      k.noalias() += t22 * (q * q.transpose());
      k.noalias() += t12 * (p * q.transpose());
      k.noalias() += t12 * (q * p.transpose());
    }
    k = 0.5 * (k + k.transpose()).eval();
    {
      Eigen::LLT<Eigen::MatrixXd> check(k);
      if (check.info() != Eigen::Success) {
        throw ComputeError("zero-forcing lost positive definiteness");
      }
    }
    double resid = 0.0;
    for (const auto& [a, b] : missing) resid += std::abs(k(a, b));
    out.sweeps = sweep;
    if (resid < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ComputeError("zero-forcing cycle did not converge within " +
                       std::to_string(max_sweeps) + " sweeps");
  }

  out.sigma = invert_spd(k, "zero-forcing result");
  out.concentration = std::move(k);
  if (renormalize) {
    Eigen::VectorXd scale = out.sigma.diagonal().array().sqrt();
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        out.sigma(i, j) /= scale(i) * scale(j);
        out.concentration(i, j) *= scale(i) * scale(j);
      }
    }
  }
  return out;
}

}  // namespace

LatentGaussianSpec random_spd(int m, double alpha, RngStream& rng) {
  if (m < 1) throw ValidationError("random_spd needs m >= 1");
  if (!(alpha >= 0.0) || !(alpha < 1.0)) {
    throw ValidationError("correlation mixing weight must lie in [0, 1)");
  }
  constexpr int kMaxAttempts = 10;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd qmat = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
    // Heavy-tailed spectrum: a few dominant eigendirections keep the
    // normalized off-diagonals of order one at any dimension, so alpha maps
    // onto the typical correlation magnitude (|rho| <~ alpha).
    Eigen::VectorXd lambda(m);
    for (int i = 0; i < m; ++i) lambda(i) = std::exp(5.0 * rng.normal());

    Eigen::MatrixXd r = qmat * lambda.asDiagonal() * qmat.transpose();
    r = 0.5 * (r + r.transpose()).eval();
    bool bad = false;
    for (int i = 0; i < m && !bad; ++i) bad = !(r(i, i) > 1e-12);
    if (bad) continue;
    Eigen::VectorXd scale = r.diagonal().array().sqrt();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) r(i, j) /= scale(i) * scale(j);

    // Reflect coordinates so the dominant eigendirection has one sign: the
    // correlations come out predominantly positive instead of cancelling,
    // which is what lets alpha drive aggregate dependence. The reflection is
    // well defined (s and -s give the same matrix).
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
      if (es.info() != Eigen::Success) continue;
      const Eigen::VectorXd lead = es.eigenvectors().col(m - 1);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if ((lead(i) < 0.0) != (lead(j) < 0.0)) r(i, j) = -r(i, j);
    }

    LatentGaussianSpec spec;
    spec.alpha = alpha;
    spec.sigma = (1.0 - alpha) * Eigen::MatrixXd::Identity(m, m) + alpha * r;
    Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);
    if (llt.info() != Eigen::Success) continue;
    spec.concentration = llt.solve(Eigen::MatrixXd::Identity(m, m));
    return spec;
  }
  throw ComputeError("random_spd failed to produce a positive-definite matrix");
}

LatentGaussianSpec random_spd(int m, double alpha, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return random_spd(m, alpha, rng);
}

LatentGaussianSpec enforce_zeros(const LatentGaussianSpec& spec, const DependencyGraph& dep,
                                 double tol, int max_sweeps) {
  if (spec.dim() != dep.m()) {
    throw ValidationError("latent dimension " + std::to_string(spec.dim()) +
                          " does not match the dependency graph's m=" +
                          std::to_string(dep.m()));
  }
  std::vector<std::pair<int, int>> missing;
  for (int a = 0; a < dep.m(); ++a) {
    for (int b = a + 1; b < dep.m(); ++b) {
      if (!dep.has_edge(a, b)) missing.emplace_back(a, b);
    }
  }
  if (missing.empty()) return spec;

  ZeroForced forced = zero_force(spec.sigma, missing, tol, max_sweeps, true);
  LatentGaussianSpec out;
  out.sigma = std::move(forced.sigma);
  out.concentration = std::move(forced.concentration);
  out.alpha = spec.alpha;
  return out;
}

std::vector<Network> sample_gaussian_threshold(const LatentGaussianSpec& spec, int count,
                                               RngStream& rng) {
  const int m = spec.dim();
  const int n = network_size_from_dim(m);
  Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);
  if (llt.info() != Eigen::Success) {
    throw ComputeError("covariance factorization failed; matrix not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();

  std::vector<Network> samples;
  samples.reserve(std::size_t(count));
  Eigen::VectorXd xi(m);
  for (int s = 0; s < count; ++s) {
    for (int i = 0; i < m; ++i) xi(i) = rng.normal();
    const Eigen::VectorXd z = lower * xi;
    Network net(n);
    for (int i = 0; i < m; ++i) {
      if (z(i) >= 0.0) net.set(i, true);
    }
    samples.push_back(std::move(net));
  }
  return samples;
}

std::vector<Network> sample_gaussian_threshold(const LatentGaussianSpec& spec, int count,
                                               std::uint64_t seed) {
  RngStream rng(seed, 0);
  return sample_gaussian_threshold(spec, count, rng);
}

std::vector<Network> sample_exact_her(const HERParams& params, const CoreSystem& core,
                                      int count, RngStream& rng) {
  const std::vector<double> theta = her_param_vec(params, core.d);
  const double p_edge = sigmoid(theta[0]);

  // Exact categorical over core subsets via the cumulative weights.
  const std::uint64_t n_subsets = core.num_subsets();
  std::vector<double> cumulative(n_subsets);
  {
    std::vector<double> coeffs(std::size_t(core.stat_cols), 0.0);
    for (int r = 2; r <= core.d; ++r) coeffs[std::size_t(r - 2)] = theta[std::size_t(r - 1)];
    coeffs[std::size_t(core.stat_cols - 1)] = theta[std::size_t(core.d)];

    auto energy = [&](std::uint64_t s) {
      double e = theta[0] * double(std::popcount(s));
      for (const auto& c : core.cliques) {
        if ((s & c.mask) == c.mask)
          e += coeffs[std::size_t(c.triangle ? core.stat_cols - 1 : c.size - 2)];
      }
      return e;
    };
    double emax = -std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; s < n_subsets; ++s) emax = std::max(emax, energy(s));
    double running = 0.0;
    for (std::uint64_t s = 0; s < n_subsets; ++s) {
      running += std::exp(energy(s) - emax);
      cumulative[s] = running;
    }
  }
  const double total = cumulative.back();

  std::vector<Network> samples;
  samples.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) {
    Network net(core.n);
    const double u = rng.uniform01() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    std::uint64_t subset =
        std::uint64_t(std::distance(cumulative.begin(), it));
    if (subset >= n_subsets) subset = n_subsets - 1;
    for (int v = 0; v < core.core_size; ++v) {
      if ((subset >> v) & 1) {
        const auto [i, j] = core.core_ends[std::size_t(v)];
        net.set_edge(i + 1, j + 1, true);
      }
    }
    for (const auto& [i, j] : core.isolated_ends) {
      if (rng.bernoulli(p_edge)) net.set_edge(i + 1, j + 1, true);
    }
    samples.push_back(std::move(net));
  }
  return samples;
}

std::vector<Network> sample_exact_her(const HERParams& params, const CoreSystem& core,
                                      int count, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return sample_exact_her(params, core, count, rng);
}

StudyResult run_study(const StudyConfig& config) {
  if (config.n < 2) throw ValidationError("study needs n >= 2");
  if (config.dep.n() != config.n) {
    throw ValidationError("study dependency graph disagrees with n");
  }
  if (config.replicates < 1) throw ValidationError("study needs replicates >= 1");
  const MarkovCheck check = validate_markov(config.dep);
  if (!check.ok()) {
    throw ValidationError("study dependency graph violates the Markov dependence property");
  }

  const CliqueCatalog catalog = enumerate_cliques(config.dep);
  const CoreDecomposition decomp = core_decompose(config.dep);
  const CoreSystem core(catalog, decomp, config.core);
  const int m = dyad_count(config.n);

  // Missing edges within the core (positions in core coordinates).
  std::vector<std::pair<int, int>> core_missing;
  for (int u = 0; u < decomp.core_size; ++u) {
    for (int v = u + 1; v < decomp.core_size; ++v) {
      if (!config.dep.has_edge(decomp.core_dyads[std::size_t(u)],
                               decomp.core_dyads[std::size_t(v)]))
        core_missing.emplace_back(u, v);
    }
  }

  const int total_tasks = 2 * config.replicates;
  std::vector<StudyRecord> records(static_cast<std::size_t>(total_tasks));

  const int workers = worker_count();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int task = 0; task < total_tasks; ++task) {
    const int collection = task / config.replicates;  // 0 = low, 1 = high
    const int replicate = task % config.replicates;
    const double alpha = collection == 0 ? config.alpha_low : config.alpha_high;

    StudyRecord rec;
    rec.replicate = replicate;
    rec.alpha = alpha;
    try {
      RngStream rng(config.seed,
                    (std::uint64_t(collection + 1) << 32) | std::uint64_t(replicate));
      const LatentGaussianSpec unconstrained = random_spd(m, alpha, rng);

      // The zero-forcing fixed point is block diagonal: isolated coordinates
      // decouple to unit variance, and the core block solves the same
      // constrained problem on the core submatrix. Cycling only the core
      // reaches the same matrix at a fraction of the cost.
      Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(m, m);
      if (decomp.core_size > 0) {
        Eigen::MatrixXd core_block(decomp.core_size, decomp.core_size);
        for (int u = 0; u < decomp.core_size; ++u)
          for (int v = 0; v < decomp.core_size; ++v)
            core_block(u, v) = unconstrained.sigma(decomp.core_dyads[std::size_t(u)],
                                                   decomp.core_dyads[std::size_t(v)]);
        const ZeroForced forced = zero_force(core_block, core_missing, 1e-8, 1000, true);
        for (int u = 0; u < decomp.core_size; ++u)
          for (int v = 0; v < decomp.core_size; ++v)
            sigma(decomp.core_dyads[std::size_t(u)], decomp.core_dyads[std::size_t(v)]) =
                forced.sigma(u, v);
      }
      LatentGaussianSpec constrained;
      constrained.sigma = std::move(sigma);
      constrained.alpha = alpha;

      const std::vector<Network> nets = sample_gaussian_threshold(constrained, 1, rng);
      const Network& x = nets.front();

      const FitResult her = fit_her(x, catalog, core, config.fit);
      if (her.status == FitStatus::SuspectNonexistent) {
        rec.discarded = true;
      } else {
        const ErFit er = fit_er(x);
        rec.loglik_her = her.loglik;
        rec.loglik_er = er.loglik;
        rec.S = 2.0 * her.loglik - 2.0 * er.loglik;
        rec.df = int(catalog.num_params()) - 1;
      }
    } catch (const ComputeError&) {
      rec.discarded = true;
    }
    records[std::size_t(task)] = rec;
  }

  StudyResult result;
  auto finish = [&](int collection, std::vector<StudyRecord>& out, int& discarded) {
    out.assign(records.begin() + collection * config.replicates,
               records.begin() + (collection + 1) * config.replicates);
    std::stable_sort(out.begin(), out.end(), [](const StudyRecord& a, const StudyRecord& b) {
      if (a.discarded != b.discarded) return !a.discarded;
      return a.S < b.S;
    });
    discarded = int(std::count_if(out.begin(), out.end(),
                                  [](const StudyRecord& r) { return r.discarded; }));
  };
  finish(0, result.low, result.discarded_low);
  finish(1, result.high, result.discarded_high);
  return result;
}

}  // namespace hiernet
