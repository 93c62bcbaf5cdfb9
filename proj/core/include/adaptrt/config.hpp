#pragma once

#include <optional>
#include <string>

#include "adaptrt/simlab.hpp"

namespace adaptrt {

// One TOML config file drives every CLI subcommand.  Sections: [environment],
// [policy], [scheme], [statistic], [test], [sweep], [inversion], [oracle].
// Unknown keys are hard errors with the offending line number.
struct RunConfig {
  // [environment]: either a named simulation environment, or the class /
  // dimensions of an externally supplied dataset.
  std::optional<EnvSpec> env;
  std::optional<EnvClass> env_class;
  int actions = 0;
  int states = 0;
  int context_dim = 0;

  // [policy]
  PolicyChoice policy{"uniform_iid", {}, {}};

  // [scheme]
  std::string scheme_name = "uniform_pi";
  bool scheme_mdp = false;
  std::string g_kind = "constant";  // constant | identity | indicator | pair_merge
  int g_action = 0;
  int g_x = 0, g_x_prime = 1;
  int max_retries = 1000;

  // [statistic]
  StatisticChoice statistic;

  // [test]
  int test_m = 100;
  double alpha = 0.05;
  bool smoothed = true;
  bool use_mcmc = false;
  int mcmc_steps = 1;

  // [sweep]
  std::vector<int> sweep_horizons{10};
  std::vector<int> sweep_m;
  int trials = 1000;
  std::uint64_t seed = 0;
  bool alternative = false;
  std::string task = "test";  // test | ci | conformal | conformal_shared
  int threads = 0;

  // [inversion]
  std::string grid_kind = "location";  // location | scale | response
  double grid_lo = 0.0, grid_hi = 0.0, grid_step = 1.0;
  ActionId inv_x = 0, inv_x_prime = 1;
  double true_delta = 0.0;
  bool conditional = false;
  bool shared = false;
  double expansion_radius = 0.0;

  // [oracle]
  OracleConfig oracle;

  // Derived helpers.
  int action_count() const;
  GMap build_g() const;
  Scheme build_scheme() const;
  EnvClass resolved_env_class(bool nonstationarity_task) const;
  ExperimentConfig experiment() const;
  Task parsed_task() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& is, const std::string& origin);

}  // namespace adaptrt
