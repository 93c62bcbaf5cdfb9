#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptrt/inversion.hpp"

namespace adaptrt {

// Data-generating environments of the simulation study.  The cond-indep
// environments switch their whole response law under the alternative; the
// non-stationarity environments change only the final step.
enum class EnvKind {
  ContextualCondIndep,      // 2-d contexts, binary treatment effect
  ThreeArmCondIndep,        // contextless, three arms, subset hypothesis
  NonstatContextless,       // +-1 arms, level shift at T under the alternative
  NonstatContextualSparse,  // 100-d contexts, sparse signal, effect swap at T
  NonstatMdp,               // 3-state chain, action swap at T
  IidTriples,               // i.i.d. (C, X, C') triples matching the MDP kernel
};

EnvKind env_kind_from_name(const std::string& name);
std::string env_kind_name(EnvKind k);

struct EnvSpec {
  EnvKind kind = EnvKind::NonstatContextless;
  // Three-arm response means; the location experiments override alt_means[1].
  std::array<double, 3> null_means{0.0, 0.0, 2.0};
  std::array<double, 3> alt_means{0.0, 3.0, 2.0};

  int n_actions() const;
  int context_dim() const;  // 0 when contextless
  int n_states() const;     // MDP-style state count
};

struct GenResult {
  Dataset data;
  std::vector<ExoDraw> u_trace;
};

// Simulates the interaction loop, recording the exogenous draws used for each
// action selection.
GenResult gen_env_data(const EnvSpec& spec, const Policy& policy, int horizon,
                       bool under_alternative, Rng& rng);

// Policy factory; params override the recorded defaults (epsilon, c, alpha,
// eta, gamma, lambda, bias).
PolicyPtr make_policy(const std::string& name, int k, int context_dim,
                      int n_states, const std::map<std::string, double>& params,
                      const std::vector<double>& bias = {});

PolicyPtr make_policy_for_env(const std::string& name, const EnvSpec& env,
                              const std::map<std::string, double>& params,
                              const std::vector<double>& bias = {});

// The environment class each environment instantiates for a given task.
EnvClass env_class_for(EnvKind kind, bool nonstationarity_task);

// --- experiment runner -------------------------------------------------------

enum class Task { Test, Ci, Conformal, ConformalShared };

struct PolicyChoice {
  std::string name;
  std::map<std::string, double> params;
  std::vector<double> bias;
};

struct StatisticChoice {
  std::string name;  // abs_t | abs_residual | mdp_nll
  int coef_index = 1;
  std::string design = "arm_indicators";  // or intercept_action_context
  std::vector<int> indicator_arms = {0, 2};
  std::string regressor = "ols";  // ols | lasso | lasso_cv
  double lambda = 1.0;
  std::vector<double> lambda_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  int folds = 5;
};

Statistic make_statistic(const StatisticChoice& c, int n_states);

struct ExperimentConfig {
  EnvSpec env;
  std::vector<PolicyChoice> policies;
  std::vector<std::string> schemes;
  StatisticChoice statistic;
  std::vector<int> horizons{10};
  std::vector<int> m_list{100};
  int trials = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool under_alternative = false;
  bool smoothed = true;   // tests smoothed, inversions unsmoothed
  bool use_mcmc = false;
  int mcmc_steps_per_member = 1;
  Task task = Task::Test;
  // Inversion settings.
  double grid_lo = -1.0, grid_hi = 9.0, grid_step = 1.0;
  GridKind ci_grid_kind = GridKind::Location;
  ActionId ci_x = 0, ci_x_prime = 1;
  double ci_true_delta = 4.0;
  bool conditional = false;
  double expansion_radius = 0.0;
  int threads = 0;
  int max_retries = 1000;
};

struct MetricsRow {
  std::string env;
  int horizon = 0;
  int m = 0;
  std::string scheme;
  std::string policy;
  std::string metric;  // type1 | power | coverage | avg_length | frac_ess | runtime_ms
  double value = 0.0;
  double se = 0.0;
  int n_trials = 0;
  int failures = 0;
  std::uint64_t seed = 0;
};

// Runs every (policy, scheme, T, m) cell, trials in parallel, and returns the
// aggregated metric rows; identical output for any thread count.  A cell with
// more than 1% failed trials reports NaN values.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& config);

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os);

// --- exact validity oracle ---------------------------------------------------

// Tiny enumerable instance: contextless, K = 2, Bernoulli responses with
// per-arm success rates, eps-greedy assignment.  Every dataset's exact null
// probability is enumerated; rejection rates of the smoothed and unsmoothed
// tests are estimated with `reps` seeded runs per dataset.
struct OracleConfig {
  int horizon = 3;
  double epsilon = 0.3;
  std::array<double, 2> theta{0.4, 0.7};
  int m = 2;
  int reps = 10000;
  std::vector<double> alphas{0.01, 0.05, 0.1, 0.2, 0.5};
  std::string scheme = "imitation_pi";      // uniform_pi | imitation_pi | re_imitation_pi
  std::string test = "weighted";            // weighted | mcmc | swap
  std::uint64_t seed = 1;
  int threads = 0;
};

struct OracleResult {
  std::vector<double> alphas;
  std::vector<double> smoothed_rate;
  std::vector<double> unsmoothed_rate;
  std::vector<double> se;  // binomial SE of the weighted rejection rate
  double max_smoothed_abs_dev = 0.0;   // max_a |smoothed - a|
  double max_unsmoothed_dev = 0.0;     // max_a (unsmoothed - a), one-sided
  bool within_tolerance = false;       // 3-SE bands
};

OracleResult exact_validity_oracle(const OracleConfig& config);

}  // namespace adaptrt
