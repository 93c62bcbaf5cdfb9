#pragma once

#include <functional>
#include <vector>

#include "adaptrt/data.hpp"
#include "adaptrt/policy.hpp"
#include "adaptrt/resample.hpp"
#include "adaptrt/rng.hpp"

namespace adaptrt {

// Pure function of a dataset; evaluated on every ensemble member.
using Statistic = std::function<double(const Dataset&)>;

struct TestOutcome {
  double p = 1.0;        // sum of weights with S(member) >= S(observed)
  double p_minus = 0.0;  // strict inequality
  double ess = 1.0;      // (sum w)^2 / sum w^2 over the m+1 members
  double frac_ess = 0.0; // (ess - 1) / m: 1 under uniform weights, 0 at a point mass
  std::vector<double> weights;
  int n_terminated = 0;  // dead-end restarts across all draws
};

// log of the computable likelihood part: the product of the policy's action
// probabilities along the sequence (all T+1 selections for MDP data,
// including the trailing action).  -infinity when any step has probability 0.
double fhat_log(const Dataset& d, const Policy& policy);

// Normalized weights from per-member log fhat and log q-self values
// (Remark-4 fast path, computed in log space with max subtraction).  Throws
// DegenerateEnsembleError when every member has zero likelihood.
std::vector<double> weights_from_logs(const std::vector<double>& log_fhat,
                                      const std::vector<double>& log_q_self);

// Generalized weights for non-conditionally-i.i.d. resampling:
//   w_i propto fhat_i * sum_{pi in Sigma : pi(0)=i} q~((D_-0)^pi | member i).
// `sigma` lists the permutations of [0:m]; `log_joint(pi, i)` returns the log
// of q~ evaluated at the pi-permuted resample list conditioned on member i.
std::vector<double> non_iid_swap_weights(
    const std::vector<double>& log_fhat,
    const std::vector<Permutation>& sigma,
    const std::function<double(const Permutation&, int)>& log_joint);

// The m+1 permutations {id} U {swap(0,i)} used by the sample-sharing tests.
std::vector<Permutation> swap_sigma(int m);

double effective_sample_size(const std::vector<double>& weights);

struct WeightedTestOptions {
  std::optional<ActionId> require_last_action;  // conditional conformal
};

// Weighted Monte Carlo randomization test: m conditionally i.i.d. resamples,
// likelihood-ratio weights, p = sum_i w_i 1[S_i >= S_0].
TestOutcome weighted_mc_test(const Dataset& d, const Scheme& scheme,
                             const Policy& policy, int m, const Statistic& s,
                             const std::vector<ExoDraw>* u_record, Rng& rng,
                             const WeightedTestOptions& opts = {});

// Weighted MC test run with the generalized swap-subset weights
// Sigma = {id} U {swap(0, i)} instead of the conditionally-i.i.d. weights;
// the resamples themselves are still conditionally i.i.d.
TestOutcome swap_weighted_mc_test(const Dataset& d, const Scheme& scheme,
                                  const Policy& policy, int m, const Statistic& s,
                                  const std::vector<ExoDraw>* u_record, Rng& rng);

// Randomized decision with exact size: fail when p_minus > alpha, reject with
// probability (alpha - p_minus) / (p - p_minus) in between, reject when
// p <= alpha.
bool smoothed_decision(double p, double p_minus, double alpha, Rng& rng);

struct McmcOptions {
  int steps_per_member = 1;  // kernel steps between retained states
  std::optional<ActionId> require_last_action;
};

// Unweighted MCMC randomization test: reversible Metropolis-Hastings kernel
// with proposal q and acceptance min(1, fhat(z) q(x|z) / (fhat(x) q(z|x)));
// a uniform position xi splits the m retained states across the two sides of
// the observed data, and the p-value counts ties at uniform weights.
TestOutcome mcmc_test(const Dataset& d, const Scheme& proposal,
                      const Policy& policy, int m, const Statistic& s,
                      const std::vector<ExoDraw>* u_record, Rng& rng,
                      const McmcOptions& opts = {});

}  // namespace adaptrt
