// Command-line front end: run single randomization tests, build confidence or
// conformal regions, run experiment sweeps, and run the exact-validity oracle.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "adaptrt/config.hpp"
#include "adaptrt/csv.hpp"
#include "adaptrt/errors.hpp"
#include "adaptrt/parallel.hpp"

namespace {

using namespace adaptrt;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_path;
  std::string data_path;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_data) {
  cmd->add_option("--config", args.config_path, "TOML run configuration")
      ->required();
  cmd->add_option("--seed", args.seed, "master seed (overrides config)");
  cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
  cmd->add_option("--out", args.out_path, "output CSV path (default stdout)");
  if (with_data)
    cmd->add_option("--data", args.data_path, "dataset CSV to test");
}

RunConfig load(const CommonArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  return cfg;
}

std::ostream& open_out(const CommonArgs& args, std::ofstream& file) {
  if (args.out_path.empty()) return std::cout;
  file.open(args.out_path);
  if (!file) throw ConfigError("cannot open output file: " + args.out_path);
  return file;
}

struct DataRun {
  Dataset data;
  PolicyPtr policy;
  Scheme scheme;
  Statistic statistic;
  EnvClass env_class;
};

// Assemble the pieces a data-driven subcommand needs, inferring dimensions
// from the dataset when the config leaves them unset.
DataRun prepare_data_run(const RunConfig& cfg, const std::string& data_path,
                         bool nonstationarity_task) {
  if (data_path.empty()) throw ConfigError("--data is required for this command");
  DataRun run{read_dataset_csv_file(data_path), nullptr, Scheme{}, nullptr,
              EnvClass::StationaryNonReactive};

  int actions = cfg.actions;
  int states = cfg.states;
  int dim = cfg.context_dim;
  for (int t = 0; t < run.data.length(); ++t) {
    const Triple& z = run.data.at(t);
    actions = std::max(actions, z.action + 1);
    if (z.context.kind == Context::Kind::State)
      states = std::max(states, z.context.state + 1);
    if (z.context.kind == Context::Kind::Vector)
      dim = std::max(dim, static_cast<int>(z.context.vec.size()));
    if (z.response.kind == Response::Kind::State)
      states = std::max(states, z.response.state + 1);
  }
  if (run.data.is_mdp()) actions = std::max(actions, run.data.trailing_action() + 1);

  run.policy = make_policy(cfg.policy.name, actions, dim, states,
                           cfg.policy.params, cfg.policy.bias);
  GMap g = GMap::constant(actions);
  if (cfg.g_kind == "identity") g = GMap::identity(actions);
  else if (cfg.g_kind == "indicator") g = GMap::indicator(actions, cfg.g_action);
  else if (cfg.g_kind == "pair_merge") g = GMap::pair_merge(actions, cfg.g_x, cfg.g_x_prime);
  else if (cfg.g_kind != "constant")
    throw ConfigError("unknown g kind: " + cfg.g_kind);
  run.scheme = scheme_from_name(cfg.scheme_name, run.data.is_mdp(), std::move(g),
                                cfg.max_retries);
  if (run.scheme.needs_u_record())
    throw ConfigError("cond_imitation_pi needs the recorded exogenous trace; "
                      "external datasets do not carry one");
  run.statistic = make_statistic(cfg.statistic, std::max(1, states));
  run.env_class = cfg.resolved_env_class(nonstationarity_task);
  return run;
}

int cmd_test(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const Scheme probe = scheme_from_name(cfg.scheme_name, false, GMap::constant(1), 1);
  const bool nonstat = !probe.randomizes_actions();
  DataRun run = prepare_data_run(cfg, args.data_path, nonstat);

  Rng rng(cfg.seed);
  Rng test_rng = rng.split(0x7e57);
  TestDriverOptions opts;
  opts.use_mcmc = cfg.use_mcmc;
  opts.mcmc_steps_per_member = cfg.mcmc_steps;
  const TestOutcome out =
      nonstat ? nonstationarity_test(run.data, *run.policy, run.env_class,
                                     run.scheme, cfg.test_m, run.statistic,
                                     nullptr, test_rng, opts)
              : cond_indep_test(run.data, *run.policy, run.scheme.g, run.env_class,
                                run.scheme, cfg.test_m, run.statistic, nullptr,
                                test_rng, opts);
  Rng dec_rng = rng.split(0xdec1);
  const bool reject = cfg.smoothed
                          ? smoothed_decision(out.p, out.p_minus, cfg.alpha, dec_rng)
                          : out.p <= cfg.alpha;

  std::ofstream file;
  std::ostream& os = open_out(args, file);
  os << "p,p_minus,ess,frac_ess,n_terminated,reject\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%d,%d\n", out.p,
                out.p_minus, out.ess, out.frac_ess, out.n_terminated,
                reject ? 1 : 0);
  os << buf;
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const auto rows = run_experiment(cfg.experiment());
  std::ofstream file;
  std::ostream& os = open_out(args, file);
  write_metrics_csv(rows, os);
  return 0;
}

int cmd_region(const CommonArgs& args, bool conformal) {
  const RunConfig cfg = load(args);
  DataRun run = prepare_data_run(cfg, args.data_path, conformal);

  Rng rng(cfg.seed);
  Rng region_rng = rng.split(0x9e910);
  InversionOptions opts;
  opts.smoothed = false;  // inversion stays conservative
  opts.use_mcmc = cfg.use_mcmc;
  opts.mcmc_steps_per_member = cfg.mcmc_steps;
  opts.expansion_radius = cfg.expansion_radius;

  Region region;
  if (conformal) {
    const Grid grid =
        make_grid(GridKind::Response, cfg.grid_lo, cfg.grid_hi, cfg.grid_step);
    if (cfg.shared) {
      region = conformal_region_shared(run.data, *run.policy, grid, cfg.alpha,
                                       run.env_class, run.scheme, cfg.test_m,
                                       run.statistic, nullptr, region_rng);
    } else {
      region = conformal_region(run.data, *run.policy, grid, cfg.alpha,
                                run.env_class, run.scheme, cfg.test_m,
                                run.statistic, nullptr, region_rng,
                                cfg.conditional, opts);
    }
  } else {
    const GridKind kind =
        cfg.grid_kind == "scale" ? GridKind::Scale : GridKind::Location;
    const Grid grid = make_grid(kind, cfg.grid_lo, cfg.grid_hi, cfg.grid_step);
    region = confidence_region(run.data, *run.policy, cfg.inv_x, cfg.inv_x_prime,
                               grid, cfg.alpha, run.env_class, run.scheme,
                               cfg.test_m, run.statistic, nullptr, region_rng,
                               opts);
  }

  std::ofstream file;
  std::ostream& os = open_out(args, file);
  write_region_csv(region, os);
  return 0;
}

int cmd_oracle(const CommonArgs& args) {
  RunConfig cfg = load(args);
  if (args.seed) cfg.oracle.seed = *args.seed;
  if (args.threads) cfg.oracle.threads = *args.threads;
  const OracleResult res = exact_validity_oracle(cfg.oracle);

  std::ofstream file;
  std::ostream& os = open_out(args, file);
  os << "alpha,smoothed_rate,unsmoothed_rate,se\n";
  char buf[160];
  for (std::size_t i = 0; i < res.alphas.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g\n", res.alphas[i],
                  res.smoothed_rate[i], res.unsmoothed_rate[i], res.se[i]);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "max_smoothed_abs_dev=%.10g max_unsmoothed_dev=%.10g within_tol=%d\n",
                res.max_smoothed_abs_dev, res.max_unsmoothed_dev,
                res.within_tolerance ? 1 : 0);
  std::cerr << buf;
  return res.within_tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomization tests for adaptively collected data"};
  app.require_subcommand(1);

  CommonArgs test_args, sim_args, ci_args, conf_args, oracle_args;
  CLI::App* test = app.add_subcommand("test", "run one randomization test");
  add_common(test, test_args, true);
  CLI::App* simulate = app.add_subcommand("simulate", "run an experiment sweep");
  add_common(simulate, sim_args, false);
  CLI::App* ci = app.add_subcommand("ci", "invert into a confidence region");
  add_common(ci, ci_args, true);
  CLI::App* conformal =
      app.add_subcommand("conformal", "invert into a conformal prediction region");
  add_common(conformal, conf_args, true);
  CLI::App* oracle =
      app.add_subcommand("oracle", "run the exact Type-I-error oracle");
  add_common(oracle, oracle_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (test->parsed()) return cmd_test(test_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (ci->parsed()) return cmd_region(ci_args, false);
    if (conformal->parsed()) return cmd_region(conf_args, true);
    if (oracle->parsed()) return cmd_oracle(oracle_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedPolicyError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TerminatedError& e) {
    std::cerr << "runtime degeneracy: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const DegenerateEnsembleError& e) {
    std::cerr << "runtime degeneracy: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
