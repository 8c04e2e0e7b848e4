#include "hiernet/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <Eigen/Dense>

#include "hiernet/numeric.hpp"

namespace hiernet {

namespace {

double inf_norm(const std::vector<double>& v) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  return mx;
}

using Objective =
    std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct AscentState {
  std::vector<double> theta;
  double value = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  FitStatus status = FitStatus::MaxIterations;
};

// Monotone ascent of a concave objective from the zero vector: BFGS search
// directions with Armijo backtracking (c = 1e-4, shrink 0.5, unit trial
// step). The inverse-curvature estimate is what makes boundary rays
// tractable: statistics pinned at the edge of their support flatten the
// likelihood exponentially in one direction while other coordinates stay
// steep, and a raw gradient step zigzags there forever (the gradient norm
// decays like 1/iterations). Accepted steps never decrease the objective.
AscentState ascend(int dim, const Objective& eval, const FitOptions& options) {
  constexpr double kArmijo = 1e-4;
  constexpr double kShrink = 0.5;
  constexpr double kMinStep = 1e-16;

  // Once per-step gains sit at the rounding floor for this long, the
  // remaining gradient is not reachable in double precision.
  constexpr int kStagnationLimit = 50;

  AscentState st;
  st.theta.assign(std::size_t(dim), 0.0);
  std::vector<double> grad(std::size_t(dim), 0.0);
  std::vector<double> cand(std::size_t(dim), 0.0);
  std::vector<double> cand_grad(std::size_t(dim), 0.0);

  st.value = eval(st.theta, grad);

  Eigen::MatrixXd curv = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd direction(dim);
  int stagnant = 0;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    st.grad_inf = inf_norm(grad);
    if (st.grad_inf <= options.tol) {
      st.status = FitStatus::Converged;
      st.iterations = iter;
      return st;
    }
    if (inf_norm(st.theta) > options.bound) {
      st.status = FitStatus::SuspectNonexistent;
      st.iterations = iter;
      return st;
    }

    const Eigen::Map<const Eigen::VectorXd> g(grad.data(), dim);
    direction = curv * g;
    double slope = direction.dot(g);
    if (!(slope > 0.0) || !direction.allFinite()) {
      curv.setIdentity();
      direction = g;
      slope = g.squaredNorm();
    }

    double step = 1.0;
    bool accepted = false;
    double cand_value = 0.0;
    while (step >= kMinStep) {
      for (int k = 0; k < dim; ++k)
        cand[std::size_t(k)] = st.theta[std::size_t(k)] + step * direction(k);
      cand_value = eval(cand, cand_grad);
      if (std::isfinite(cand_value) && cand_value >= st.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= kShrink;
    }
    if (!accepted) {
      // No step yields sufficient increase: out of floating-point headroom.
      st.iterations = iter;
      return st;
    }
    if (cand_value - st.value <= 1e-12 * (1.0 + std::abs(st.value))) {
      if (++stagnant >= kStagnationLimit) {
        st.theta.swap(cand);
        std::swap(grad, cand_grad);
        st.value = cand_value;
        st.iterations = iter + 1;
        st.grad_inf = inf_norm(grad);
        if (st.grad_inf <= options.tol) st.status = FitStatus::Converged;
        return st;
      }
    } else {
      stagnant = 0;
    }

    // Inverse BFGS update; gamma is the gradient decrease, positive along
    // ascent directions of a concave objective.
    const Eigen::Map<const Eigen::VectorXd> gc(cand_grad.data(), dim);
    const Eigen::VectorXd delta = step * direction;
    const Eigen::VectorXd gamma = g - gc;
    const double dg = delta.dot(gamma);
    if (dg > 1e-12 * delta.norm() * gamma.norm()) {
      const Eigen::VectorXd cg = curv * gamma;
      const double gcg = gamma.dot(cg);
      curv += ((dg + gcg) / (dg * dg)) * (delta * delta.transpose());
      curv -= (cg * delta.transpose() + delta * cg.transpose()) / dg;
    }

    st.theta.swap(cand);
    std::swap(grad, cand_grad);
    st.value = cand_value;
    st.iterations = iter + 1;
  }
  st.grad_inf = inf_norm(grad);
  if (st.grad_inf <= options.tol) st.status = FitStatus::Converged;
  return st;
}

Objective her_objective(const std::vector<double>& mean_stats, const CoreSystem& core) {
  return [&mean_stats, &core](const std::vector<double>& theta,
                              std::vector<double>& grad) {
    const HERParams p = her_params_from_vec(theta);
    const LogPartition lp = psi_her(p, core);
    for (std::size_t k = 0; k < theta.size(); ++k)
      grad[k] = mean_stats[k] - lp.expectations[k];
    return dot(mean_stats, theta) - lp.value;
  };
}

Objective hbeta_objective(const std::vector<double>& mean_stats, const CoreSystem& core) {
  return [&mean_stats, &core](const std::vector<double>& theta,
                              std::vector<double>& grad) {
    const HBetaParams p = hbeta_params_from_vec(theta, core.n, core.d);
    const LogPartition lp = psi_hbeta(p, core);
    for (std::size_t k = 0; k < theta.size(); ++k)
      grad[k] = mean_stats[k] - lp.expectations[k];
    return dot(mean_stats, theta) - lp.value;
  };
}

FitResult finish(const AscentState& st, double nobs) {
  FitResult out;
  out.params = st.theta;
  out.loglik = nobs * st.value;
  out.grad_inf_norm = st.grad_inf;
  out.iterations = st.iterations;
  out.status = st.status;
  return out;
}

// Exact linear-dependence check of the beta-model statistic design over the
// full network space; only feasible at enumeration scale.
std::string hbeta_rank_warning(const CliqueCatalog& catalog) {
  if (catalog.m > 12) return {};
  const int dim = hbeta_dim(catalog.n, catalog.d);
  const std::uint64_t n_nets = std::uint64_t(1) << catalog.m;
  Eigen::MatrixXd design(Eigen::Index(n_nets), dim);
  Network x(catalog.n);
  for (std::uint64_t code = 0; code < n_nets; ++code) {
    for (int dy = 0; dy < catalog.m; ++dy) x.set(dy, (code >> dy) & 1);
    const std::vector<double> row = stat_vec(hbeta_stats(x, catalog));
    for (int k = 0; k < dim; ++k) design(Eigen::Index(code), k) = row[std::size_t(k)];
  }
  // Columns that never move are structurally absent, not dependent.
  std::vector<int> active;
  for (int k = 0; k < dim; ++k) {
    const double spread = design.col(k).maxCoeff() - design.col(k).minCoeff();
    if (spread > 0.0) active.push_back(k);
  }
  if (active.empty()) return {};
  Eigen::MatrixXd centered(design.rows(), Eigen::Index(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto col = design.col(active[k]);
    centered.col(Eigen::Index(k)) = col.array() - col.mean();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
  qr.setThreshold(1e-10);
  if (qr.rank() < Eigen::Index(active.size())) {
    return "sufficient statistics are linearly dependent on the network space; "
           "the MLE is not unique";
  }
  return {};
}

}  // namespace

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIterations: return "max_iterations";
    case FitStatus::SuspectNonexistent: return "suspect_nonexistent";
  }
  return "unknown";
}

double loglik_her(const Network& x, const HERParams& params, const CliqueCatalog& catalog,
                  const CoreSystem& core) {
  const std::vector<double> stats = stat_vec(her_stats(x, catalog));
  const std::vector<double> theta = her_param_vec(params, core.d);
  return dot(stats, theta) - psi_her(params, core).value;
}

std::vector<double> grad_her(const Network& x, const HERParams& params,
                             const CliqueCatalog& catalog, const CoreSystem& core) {
  const std::vector<double> stats = stat_vec(her_stats(x, catalog));
  const LogPartition lp = psi_her(params, core);
  std::vector<double> g(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k) g[k] = stats[k] - lp.expectations[k];
  return g;
}

double loglik_hbeta(const Network& x, const HBetaParams& params, const CliqueCatalog& catalog,
                    const CoreSystem& core) {
  const std::vector<double> stats = stat_vec(hbeta_stats(x, catalog));
  HBetaParams padded = params;
  if (padded.d < core.d) {
    HBetaParams grown = HBetaParams::zeros(core.n, core.d);
    for (int i = 0; i < core.n; ++i)
      for (int r = 1; r <= padded.d; ++r) grown.beta_at(i, r) = padded.beta_at(i, r);
    grown.tau = padded.tau;
    padded = std::move(grown);
  }
  return dot(stats, hbeta_param_vec(padded)) - psi_hbeta(params, core).value;
}

std::vector<double> grad_hbeta(const Network& x, const HBetaParams& params,
                               const CliqueCatalog& catalog, const CoreSystem& core) {
  const std::vector<double> stats = stat_vec(hbeta_stats(x, catalog));
  const LogPartition lp = psi_hbeta(params, core);
  std::vector<double> g(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k) g[k] = stats[k] - lp.expectations[k];
  return g;
}

// An edge count on the boundary of [0, m] makes the first-order parameter
// diverge with certainty, yet the gradient still reaches any finite tolerance
// at moderate parameter values; flag such fits outright.
bool edge_stat_on_boundary(double mean_edges, int m) {
  return !(mean_edges > 0.0) || !(mean_edges < double(m));
}

FitResult fit_her_pooled(const std::vector<double>& mean_stats, double nobs,
                         const CoreSystem& core, const FitOptions& options) {
  if (int(mean_stats.size()) != her_dim(core.d)) {
    throw ValidationError("statistic vector has the wrong length");
  }
  const AscentState st = ascend(her_dim(core.d), her_objective(mean_stats, core), options);
  FitResult out = finish(st, nobs);
  if (edge_stat_on_boundary(mean_stats[0], core.m)) {
    out.status = FitStatus::SuspectNonexistent;
  }
  return out;
}

FitResult fit_her(const Network& x, const CliqueCatalog& catalog, const CoreSystem& core,
                  const FitOptions& options) {
  return fit_her_pooled(stat_vec(her_stats(x, catalog)), 1.0, core, options);
}

FitResult fit_hbeta_pooled(const std::vector<double>& mean_stats, double nobs,
                           const CliqueCatalog& catalog, const CoreSystem& core,
                           const FitOptions& options) {
  if (int(mean_stats.size()) != hbeta_dim(core.n, core.d)) {
    throw ValidationError("statistic vector has the wrong length");
  }
  const AscentState st =
      ascend(hbeta_dim(core.n, core.d), hbeta_objective(mean_stats, core), options);
  FitResult out = finish(st, nobs);
  out.warning = hbeta_rank_warning(catalog);
  double mean_edges = 0.0;
  for (int i = 0; i < core.n; ++i)
    mean_edges += mean_stats[std::size_t(hbeta_coord(i, 1, core.d))];
  if (edge_stat_on_boundary(0.5 * mean_edges, core.m)) {
    out.status = FitStatus::SuspectNonexistent;
  }
  return out;
}

FitResult fit_hbeta(const Network& x, const CliqueCatalog& catalog, const CoreSystem& core,
                    const FitOptions& options) {
  return fit_hbeta_pooled(stat_vec(hbeta_stats(x, catalog)), 1.0, catalog, core, options);
}

ErFit fit_er_mean(double mean_edges, int m, double nobs) {
  if (!(mean_edges > 0.0) || !(mean_edges < double(m))) {
    throw ComputeError("Erdos-Renyi MLE does not exist: edge count " +
                       std::to_string(mean_edges) + " is on the boundary of [0, " +
                       std::to_string(m) + "]");
  }
  const double p = mean_edges / double(m);
  ErFit fit;
  fit.q_hat = logit(p);
  fit.loglik = nobs * (mean_edges * std::log(p) + (double(m) - mean_edges) * std::log1p(-p));
  return fit;
}

ErFit fit_er(const Network& x) {
  return fit_er_mean(double(er_stats(x)), x.dyads(), 1.0);
}

LRTReport lrt(const Network& x, const CliqueCatalog& catalog, const CoreSystem& core,
              const FitOptions& options) {
  const FitResult her = fit_her(x, catalog, core, options);
  if (her.status == FitStatus::SuspectNonexistent) {
    throw ComputeError("hierarchical MLE appears nonexistent (parameter norm diverged)");
  }
  const ErFit er = fit_er(x);
  LRTReport report;
  report.loglik_her = her.loglik;
  report.loglik_er = er.loglik;
  report.S = 2.0 * her.loglik - 2.0 * er.loglik;
  report.df = int(catalog.num_params()) - 1;
  return report;
}

LRTReport lrt(const Network& x, const DependencyGraph& dep, const FitOptions& options,
              const CoreSystemOptions& core_options) {
  const MarkovCheck check = validate_markov(dep);
  if (!check.ok()) {
    throw ValidationError("dependency graph violates the Markov dependence property");
  }
  const CliqueCatalog catalog = enumerate_cliques(dep);
  const CoreDecomposition decomp = core_decompose(dep);
  const CoreSystem core(catalog, decomp, core_options);
  return lrt(x, catalog, core, options);
}

namespace {

std::string describe_edges(const DependencyGraph& dep) {
  std::string text = "{";
  for (std::size_t k = 0; k < dep.edges().size(); ++k) {
    const auto [a, b] = dep.edges()[k];
    const auto da = dyad_from_index(a, dep.n());
    const auto db = dyad_from_index(b, dep.n());
    if (k) text += ", ";
    text += std::to_string(da.first) + "-" + std::to_string(da.second) + "~" +
            std::to_string(db.first) + "-" + std::to_string(db.second);
  }
  return text + "}";
}

struct GraphFit {
  double loglik = 0.0;
  std::int64_t params = 0;
};

}  // namespace

DependencyGraph backward_select(const std::vector<Network>& sample, const DependencyGraph& d0,
                                double alpha, const FitOptions& options,
                                const CoreSystemOptions& core_options) {
  if (sample.empty()) throw ValidationError("backward selection needs at least one network");
  for (const Network& x : sample) {
    if (x.n() != d0.n()) throw ValidationError("network and dependency graph disagree on n");
  }
  const double nobs = double(sample.size());

  auto fit_graph = [&](const DependencyGraph& g) -> GraphFit {
    const CliqueCatalog catalog = enumerate_cliques(g);
    const CoreDecomposition decomp = core_decompose(g);
    const CoreSystem core(catalog, decomp, core_options);
    std::vector<double> mean(std::size_t(her_dim(catalog.d)), 0.0);
    for (const Network& x : sample) {
      const std::vector<double> s = stat_vec(her_stats(x, catalog));
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += s[k];
    }
    for (double& v : mean) v /= nobs;
    const FitResult fit = fit_her_pooled(mean, nobs, core, options);
    if (fit.status == FitStatus::SuspectNonexistent) {
      throw ComputeError("backward selection aborted: MLE appears nonexistent for "
                         "dependency graph with edges " + describe_edges(g));
    }
    return GraphFit{fit.loglik, catalog.num_params()};
  };

  DependencyGraph current = d0;
  GraphFit current_fit = fit_graph(current);

  std::vector<std::pair<int, int>> order = d0.edges();
  std::sort(order.begin(), order.end(), std::greater<>());

  for (const auto& edge : order) {
    const DependencyGraph candidate = current.without_edge(edge.first, edge.second);
    const GraphFit cand_fit = fit_graph(candidate);
    const std::int64_t df = current_fit.params - cand_fit.params;
    bool remove = true;
    if (df > 0) {
      const double stat = 2.0 * (current_fit.loglik - cand_fit.loglik);
      const boost::math::chi_squared dist{double(df)};
      remove = stat <= boost::math::quantile(dist, 1.0 - alpha);
    }
    if (remove) {
      current = candidate;
      current_fit = cand_fit;
    }
  }
  return current;
}

DependencyGraph backward_select(const Network& x, const DependencyGraph& d0, double alpha,
                                const FitOptions& options,
                                const CoreSystemOptions& core_options) {
  return backward_select(std::vector<Network>{x}, d0, alpha, options, core_options);
}

}  // namespace hiernet
