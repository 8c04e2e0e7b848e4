// hiernet: hierarchical network models with exact normalizing constants.
//
// Exit codes: 0 success, 1 validation failure, 2 computational failure,
// 64 usage errors.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hiernet/estimation.hpp"
#include "hiernet/io.hpp"
#include "hiernet/p1.hpp"
#include "hiernet/simulate.hpp"

namespace {

using namespace hiernet;

struct Prepared {
  DependencyGraph dep;
  CliqueCatalog catalog;
  CoreDecomposition decomp;
};

DependencyGraph load_valid_dep(const std::string& path) {
  DependencyGraph dep = read_dep_graph_file(path);
  const MarkovCheck check = validate_markov(dep);
  if (!check.ok()) {
    std::ostringstream msg;
    msg << path << ": dependency graph violates the Markov dependence property:";
    for (const auto& [a, b] : check.violations) {
      const auto da = dyad_from_index(a, dep.n());
      const auto db = dyad_from_index(b, dep.n());
      msg << " {" << da.first << "-" << da.second << ", " << db.first << "-"
          << db.second << "}";
    }
    throw ValidationError(msg.str());
  }
  return dep;
}

Prepared prepare(const std::string& dep_path) {
  Prepared p{load_valid_dep(dep_path), {}, {}};
  p.catalog = enumerate_cliques(p.dep);
  p.decomp = core_decompose(p.dep);
  return p;
}

CoreSystemOptions core_options_from(int core_cap, double mem_budget_mb) {
  CoreSystemOptions opts;
  opts.core_cap = core_cap;
  opts.mem_budget_bytes = std::size_t(mem_budget_mb * 1024.0 * 1024.0);
  return opts;
}

nlohmann::json fit_result_json(const FitResult& fit, const std::string& model,
                               const CoreSystem& core) {
  nlohmann::json j{{"model", model},
                   {"status", to_string(fit.status)},
                   {"loglik", fit.loglik},
                   {"grad_inf_norm", fit.grad_inf_norm},
                   {"iterations", fit.iterations}};
  if (model == "her") {
    j["params"] = her_params_to_json(her_params_from_vec(fit.params));
  } else {
    j["params"] =
        hbeta_params_to_json(hbeta_params_from_vec(fit.params, core.n, core.d));
  }
  if (!fit.warning.empty()) j["warning"] = fit.warning;
  return j;
}

int cmd_validate_dep(const std::string& dep_path) {
  const DependencyGraph dep = read_dep_graph_file(dep_path);
  const MarkovCheck check = validate_markov(dep);
  if (check.ok()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& [a, b] : check.violations) {
    const auto da = dyad_from_index(a, dep.n());
    const auto db = dyad_from_index(b, dep.n());
    std::cerr << "violation: dependency edge {" << da.first << "-" << da.second
              << ", " << db.first << "-" << db.second
              << "} joins dyads with no common node\n";
  }
  return 1;
}

int cmd_stats(const std::string& network_path, const std::string& dep_path) {
  const Network x = read_network_file(network_path);
  const Prepared p = prepare(dep_path);
  if (x.n() != p.dep.n()) {
    throw ValidationError("network and dependency graph disagree on n");
  }
  const HERStats her = her_stats(x, p.catalog);
  const HBetaStats hbeta = hbeta_stats(x, p.catalog);
  std::ostringstream out;
  for (int r = 1; r <= p.catalog.d; ++r)
    out << "s\t" << r << "\t" << her.s[std::size_t(r - 1)] << "\n";
  out << "st\t" << her.s_t << "\n";
  for (int i = 1; i <= p.catalog.n; ++i)
    for (int r = 1; r <= p.catalog.d; ++r)
      out << "d\t" << i << "\t" << r << "\t" << hbeta.at(i - 1, r) << "\n";
  for (int i = 1; i <= p.catalog.n; ++i)
    out << "dt\t" << i << "\t" << hbeta.d_t[std::size_t(i - 1)] << "\n";
  std::cout << out.str();
  return 0;
}

int cmd_psi(const std::string& model, const std::string& params_path,
            const std::string& dep_path, const CoreSystemOptions& core_opts) {
  const Prepared p = prepare(dep_path);
  const CoreSystem core(p.catalog, p.decomp, core_opts);
  const nlohmann::json pj = load_json_file(params_path);
  std::ostringstream out;
  if (model == "her") {
    const LogPartition lp = psi_her(her_params_from_json(pj), core);
    out << "psi\t" << format_double(lp.value) << "\n";
    for (int r = 1; r <= core.d; ++r)
      out << "E_s\t" << r << "\t" << format_double(lp.expectations[std::size_t(r - 1)])
          << "\n";
    out << "E_st\t" << format_double(lp.expectations[std::size_t(core.d)]) << "\n";
  } else {
    const LogPartition lp = psi_hbeta(hbeta_params_from_json(pj, core.n), core);
    out << "psi\t" << format_double(lp.value) << "\n";
    for (int i = 1; i <= core.n; ++i)
      for (int r = 1; r <= core.d; ++r)
        out << "E_d\t" << i << "\t" << r << "\t"
            << format_double(lp.expectations[std::size_t(hbeta_coord(i - 1, r, core.d))])
            << "\n";
    for (int i = 1; i <= core.n; ++i)
      out << "E_dt\t" << i << "\t"
          << format_double(
                 lp.expectations[std::size_t(hbeta_tau_coord(i - 1, core.n, core.d))])
          << "\n";
  }
  std::cout << out.str();
  return 0;
}

int cmd_fit(const std::string& model, const std::string& network_path,
            const std::string& dep_path, const FitOptions& fit_opts,
            const CoreSystemOptions& core_opts) {
  const Network x = read_network_file(network_path);
  if (model == "er") {
    const ErFit er = fit_er(x);  // throws ComputeError on boundary counts
    nlohmann::json j{{"model", "er"},
                     {"status", "converged"},
                     {"loglik", er.loglik},
                     {"params", {{"q", er.q_hat}}}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (dep_path.empty()) throw ValidationError("--dep is required for model " + model);
  const Prepared p = prepare(dep_path);
  if (x.n() != p.dep.n()) {
    throw ValidationError("network and dependency graph disagree on n");
  }
  const CoreSystem core(p.catalog, p.decomp, core_opts);
  const FitResult fit = model == "her" ? fit_her(x, p.catalog, core, fit_opts)
                                       : fit_hbeta(x, p.catalog, core, fit_opts);
  std::cout << fit_result_json(fit, model, core).dump(2) << "\n";
  return fit.status == FitStatus::Converged ? 0 : 2;
}

int cmd_lrt(const std::string& network_path, const std::string& dep_path,
            const FitOptions& fit_opts, const CoreSystemOptions& core_opts) {
  const Network x = read_network_file(network_path);
  const DependencyGraph dep = load_valid_dep(dep_path);
  const LRTReport report = lrt(x, dep, fit_opts, core_opts);
  nlohmann::json j{{"S", report.S},
                   {"loglik_her", report.loglik_her},
                   {"loglik_er", report.loglik_er},
                   {"df", report.df}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_select(const std::string& network_path, const std::string& dep_path, double alpha,
               const FitOptions& fit_opts, const CoreSystemOptions& core_opts) {
  const Network x = read_network_file(network_path);
  const DependencyGraph d0 = load_valid_dep(dep_path);
  const DependencyGraph selected = backward_select(x, d0, alpha, fit_opts, core_opts);
  write_dep_graph(selected, std::cout);
  return 0;
}

int cmd_simulate(const std::string& method, const std::string& dep_path,
                 const std::string& params_path, double alpha, int count,
                 std::uint64_t seed, const std::string& out_dir,
                 const CoreSystemOptions& core_opts) {
  const Prepared p = prepare(dep_path);
  RngStream rng(seed, 0);
  std::vector<Network> samples;
  if (method == "exact") {
    if (params_path.empty()) {
      throw ValidationError("--params is required for --method exact");
    }
    const CoreSystem core(p.catalog, p.decomp, core_opts);
    const HERParams params = her_params_from_json(load_json_file(params_path));
    samples = sample_exact_her(params, core, count, rng);
  } else {
    const LatentGaussianSpec unconstrained = random_spd(p.dep.m(), alpha, rng);
    const LatentGaussianSpec constrained = enforce_zeros(unconstrained, p.dep);
    samples = sample_gaussian_threshold(constrained, count, rng);
  }
  std::filesystem::create_directories(out_dir);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "net_%05zu.net", k);
    std::ostringstream body;
    write_network(samples[k], body);
    atomic_write_file((std::filesystem::path(out_dir) / name).string(), body.str());
  }
  return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_path,
              bool seed_given, std::uint64_t seed_override,
              const CoreSystemOptions& core_opts) {
  const nlohmann::json cfg = load_json_file(config_path);
  StudyConfig config;
  config.core = core_opts;
  if (!cfg.contains("n")) throw ValidationError("study config needs 'n'");
  config.n = cfg.at("n").get<int>();
  if (cfg.contains("replicates")) config.replicates = cfg.at("replicates").get<int>();
  if (cfg.contains("alpha_low")) config.alpha_low = cfg.at("alpha_low").get<double>();
  if (cfg.contains("alpha_high")) config.alpha_high = cfg.at("alpha_high").get<double>();
  if (cfg.contains("seed")) config.seed = cfg.at("seed").get<std::uint64_t>();
  if (seed_given) config.seed = seed_override;
  if (cfg.contains("dep_file")) {
    config.dep = load_valid_dep(cfg.at("dep_file").get<std::string>());
  } else if (cfg.contains("dep_cliques")) {
    config.dep =
        make_disjoint_clique_dep(config.n, cfg.at("dep_cliques").get<std::vector<int>>());
  } else {
    throw ValidationError("study config needs 'dep_file' or 'dep_cliques'");
  }

  const StudyResult result = run_study(config);
  std::ostringstream csv;
  csv << "replicate,S,loglik_her,loglik_er,df,discarded,alpha\n";
  auto emit = [&csv](const std::vector<StudyRecord>& records) {
    for (const StudyRecord& r : records) {
      csv << r.replicate << ",";
      if (r.discarded) {
        csv << ",,," << r.df << ",1,";
      } else {
        csv << format_double(r.S) << "," << format_double(r.loglik_her) << ","
            << format_double(r.loglik_er) << "," << r.df << ",0,";
      }
      csv << format_double(r.alpha) << "\n";
    }
  };
  emit(result.low);
  emit(result.high);
  atomic_write_file(out_path, csv.str());
  return 0;
}

int cmd_p1_eval(const std::string& network_path, const std::string& dep_path,
                const std::string& params_path) {
  const DirectedNetwork x = read_directed_network_file(network_path);
  const Prepared p = prepare(dep_path);
  if (x.n != p.dep.n()) {
    throw ValidationError("network and dependency graph disagree on n");
  }
  const P1Params params = p1_params_from_json(load_json_file(params_path), p.dep.n());
  const double log_unnorm = p1_log_unnorm(x, params, p.catalog);
  const double psi = p1_psi_enum(params, p.catalog);
  nlohmann::json j{{"log_unnorm", log_unnorm},
                   {"psi", psi},
                   {"prob", std::exp(log_unnorm - psi)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical network models: exact partition functions, MLE,\n"
               "simulation and dependency-graph selection\n\n"
               "The HIERNET_THREADS environment variable bounds the worker count."};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  int core_cap = 24;
  double mem_budget_mb = 512.0;
  auto* seed_opt =
      app.add_option("--seed", seed, "seed for all randomized paths")->capture_default_str();
  app.add_option("--core-cap", core_cap, "largest allowed dependency-graph core")
      ->capture_default_str();
  app.add_option("--mem-budget", mem_budget_mb, "memory budget in MiB for subset tables")
      ->capture_default_str();

  // validate-dep
  auto* c_validate = app.add_subcommand("validate-dep", "check the Markov dependence property");
  std::string v_dep;
  c_validate->add_option("--dep", v_dep, "dependency-graph file")->required();

  // stats
  auto* c_stats = app.add_subcommand("stats", "sufficient statistics of a network");
  std::string s_net, s_dep;
  c_stats->add_option("--network", s_net)->required();
  c_stats->add_option("--dep", s_dep)->required();

  // psi
  auto* c_psi = app.add_subcommand("psi", "log normalizing constant and expectations");
  std::string p_model, p_params, p_dep;
  c_psi->add_option("--model", p_model)->required()->check(CLI::IsMember({"her", "hbeta"}));
  c_psi->add_option("--params", p_params)->required();
  c_psi->add_option("--dep", p_dep)->required();

  // fit
  auto* c_fit = app.add_subcommand("fit", "maximum likelihood estimation");
  std::string f_model, f_net, f_dep;
  FitOptions fit_opts;
  c_fit->add_option("--model", f_model)->required()->check(CLI::IsMember({"er", "her", "hbeta"}));
  c_fit->add_option("--network", f_net)->required();
  c_fit->add_option("--dep", f_dep);
  c_fit->add_option("--tol", fit_opts.tol, "gradient inf-norm tolerance")->capture_default_str();
  c_fit->add_option("--max-iter", fit_opts.max_iter)->capture_default_str();
  c_fit->add_option("--bound", fit_opts.bound, "nonexistence flag on |parameter|")
      ->capture_default_str();

  // lrt
  auto* c_lrt = app.add_subcommand("lrt", "likelihood ratio against Erdos-Renyi");
  std::string l_net, l_dep;
  FitOptions lrt_opts;
  c_lrt->add_option("--network", l_net)->required();
  c_lrt->add_option("--dep", l_dep)->required();
  c_lrt->add_option("--tol", lrt_opts.tol)->capture_default_str();
  c_lrt->add_option("--max-iter", lrt_opts.max_iter)->capture_default_str();
  c_lrt->add_option("--bound", lrt_opts.bound)->capture_default_str();

  // select
  auto* c_select = app.add_subcommand("select", "backward dependency-graph selection");
  std::string se_net, se_dep;
  double se_alpha = 0.05;
  FitOptions select_opts;
  c_select->add_option("--network", se_net)->required();
  c_select->add_option("--dep", se_dep)->required();
  c_select->add_option("--alpha", se_alpha, "test level")->capture_default_str();
  c_select->add_option("--tol", select_opts.tol)->capture_default_str();

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "draw networks");
  std::string sim_method, sim_dep, sim_params, sim_out;
  double sim_alpha = 0.5;
  int sim_count = 1;
  c_sim->add_option("--method", sim_method)
      ->required()
      ->check(CLI::IsMember({"exact", "gaussian"}));
  c_sim->add_option("--dep", sim_dep)->required();
  c_sim->add_option("--params", sim_params, "HER parameter file (exact method)");
  c_sim->add_option("--alpha", sim_alpha, "correlation strength (gaussian method)")
      ->capture_default_str();
  c_sim->add_option("--count", sim_count)->required();
  c_sim->add_option("--out", sim_out, "output directory")->required();

  // study
  auto* c_study = app.add_subcommand("study", "likelihood-ratio simulation study");
  std::string st_config, st_out;
  c_study->add_option("--config", st_config)->required();
  c_study->add_option("--out", st_out, "output CSV")->required();

  // p1-eval
  auto* c_p1 = app.add_subcommand("p1-eval", "hierarchical p1 evaluation by enumeration");
  std::string p1_net, p1_dep, p1_params;
  c_p1->add_option("--network", p1_net, "directed network file")->required();
  c_p1->add_option("--dep", p1_dep)->required();
  c_p1->add_option("--params", p1_params)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  const CoreSystemOptions core_opts = core_options_from(core_cap, mem_budget_mb);
  try {
    if (c_validate->parsed()) return cmd_validate_dep(v_dep);
    if (c_stats->parsed()) return cmd_stats(s_net, s_dep);
    if (c_psi->parsed()) return cmd_psi(p_model, p_params, p_dep, core_opts);
    if (c_fit->parsed()) return cmd_fit(f_model, f_net, f_dep, fit_opts, core_opts);
    if (c_lrt->parsed()) return cmd_lrt(l_net, l_dep, lrt_opts, core_opts);
    if (c_select->parsed())
      return cmd_select(se_net, se_dep, se_alpha, select_opts, core_opts);
    if (c_sim->parsed())
      return cmd_simulate(sim_method, sim_dep, sim_params, sim_alpha, sim_count, seed,
                          sim_out, core_opts);
    if (c_study->parsed())
      return cmd_study(st_config, st_out, seed_opt->count() > 0, seed, core_opts);
    if (c_p1->parsed()) return cmd_p1_eval(p1_net, p1_dep, p1_params);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const ComputeError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
