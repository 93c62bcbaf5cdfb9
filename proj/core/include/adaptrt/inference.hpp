#pragma once

#include <string>

#include "adaptrt/randtest.hpp"

namespace adaptrt {

// Environment assumption bundles; they determine the legal permutation class
// and whether action randomization is allowed for each null hypothesis.
enum class EnvClass {
  NonReactive,                   // Markov + weak non-reactivity
  Mdp,                           // Markov, response is next state
  StationaryNonReactive,         // + Y-stationarity, C-stationarity
  StationaryMdp,                 // MDP + Y-stationarity
  CStationaryStrongNonReactive,  // Markov + C-stationarity & strong non-reactivity
};

EnvClass env_class_from_name(const std::string& name);
std::string env_class_name(EnvClass e);

// Throws ConfigError when the scheme is not permitted for the hypothesis in
// the given environment.
void validate_cond_indep_pairing(EnvClass env, const Scheme& scheme);
void validate_nonstationarity_pairing(EnvClass env, const Scheme& scheme);

struct TestDriverOptions {
  bool use_mcmc = false;
  int mcmc_steps_per_member = 1;
  std::optional<ActionId> require_last_action;
};

// Conditional-independence test of Y_t vs X_t given (C_t, g(X_t)).  The
// scheme must randomize actions conditional on g and may permute only within
// the environment's allowed class.
TestOutcome cond_indep_test(const Dataset& d, const Policy& policy, const GMap& g,
                            EnvClass env, Scheme scheme, int m, const Statistic& s,
                            const std::vector<ExoDraw>* u_record, Rng& rng,
                            const TestDriverOptions& opts = {});

// Non-stationarity test of H0: Y_t | (C_t, X_t) constant in t.  Permutation
// schemes only; MDP environments force the chain-restricted samplers.
TestOutcome nonstationarity_test(const Dataset& d, const Policy& policy,
                                 EnvClass env, const Scheme& scheme, int m,
                                 const Statistic& s,
                                 const std::vector<ExoDraw>* u_record, Rng& rng,
                                 const TestDriverOptions& opts = {});

// --- test statistics -------------------------------------------------------

// Design builders for the |t|-statistic.
enum class DesignKind {
  InterceptActionContext,  // rows (1, X_t, C_t...)
  ArmIndicators,           // rows (1, 1[X_t = a]) for each listed arm
};

// |t| for the coef_index-th design column, with the degenerate-case rules:
// singular or over-saturated designs give 0, exact fits the large sentinel.
Statistic stat_abs_t(DesignKind design, std::vector<ActionId> indicator_arms,
                     int coef_index);

enum class RegressorKind { Ols, Lasso, LassoCv };

struct RegressorSpec {
  RegressorKind kind = RegressorKind::Ols;
  double lambda = 1.0;                                   // Lasso
  std::vector<double> lambda_grid = {0.01, 0.1, 1.0, 10.0, 100.0};  // LassoCv
  int folds = 5;
  int max_sweeps = 100;   // truncated descent is still a valid statistic
  double tol = 1e-6;
};

// Non-conformity score |Y_T - mu(X_T, C_T)| with mu fit on all T points
// (features: intercept, action id, context components).
Statistic stat_abs_residual(const RegressorSpec& reg);

// -log of the add-one-smoothed empirical transition probability of the last
// transition; n_states fixes the smoothing denominator.
Statistic stat_mdp_nll(int n_states);

}  // namespace adaptrt
