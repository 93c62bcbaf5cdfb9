#pragma once

#include <memory>
#include <string>
#include <vector>

#include "adaptrt/data.hpp"
#include "adaptrt/rng.hpp"

namespace adaptrt {

// One step of exogenous randomness U_t.  Policies draw either a direct
// categorical value (i.i.d. policies) or an (explore flag, tie-break order)
// pair; `order` is a uniform permutation of the action set, used both for the
// explore pick (its first element) and for breaking argmax ties uniformly.
struct ExoDraw {
  int direct = -1;
  bool explore = false;
  std::vector<ActionId> order;
};

struct ExoAtom {
  ExoDraw value;
  double prob = 0.0;
};
using USupport = std::vector<ExoAtom>;

// An adaptive assignment algorithm with exactly computable per-step action
// probabilities.  Sufficient statistics are rebuilt deterministically from
// any history prefix via reset()/observe().
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::unique_ptr<Policy> clone() const = 0;
  virtual std::string name() const = 0;
  virtual int num_actions() const = 0;

  virtual void reset() = 0;
  virtual void observe(const Triple& z) = 0;

  // P_A(. | context, current history); sums to 1.
  virtual void action_probs(const Context& c, std::vector<double>& out) const = 0;
  double action_prob(const Context& c, ActionId a) const;

  virtual bool is_randomized() const = 0;

  // Exogenous decomposition: finite support of U_t (the same law every t) and
  // the deterministic decision rule.  Marginalizing decide() over u_support()
  // reproduces action_probs() exactly.
  virtual USupport u_support() const = 0;
  virtual ActionId decide(const Context& c, const ExoDraw& u) const = 0;

  // Draw U_t, then decide; keeps sample_action consistent with the
  // decomposition by construction.
  ExoDraw sample_u(Rng& rng) const;
  ActionId sample_action(const Context& c, Rng& rng, ExoDraw* u_out = nullptr) const;
};

using PolicyPtr = std::unique_ptr<Policy>;

PolicyPtr make_uniform_iid(int k);
PolicyPtr make_biased_iid(std::vector<double> probs);
PolicyPtr make_eps_greedy(int k, double epsilon);
PolicyPtr make_ucb(int k, double c = 1.0);
PolicyPtr make_eps_greedy_linear(int k, int dim, double epsilon, double lambda = 10.0);
PolicyPtr make_linucb(int k, int dim, double alpha = 1.0);
PolicyPtr make_q_greedy(int k, int n_states, double eta = 0.1, double gamma = 0.9);
PolicyPtr make_q_eps_greedy(int k, int n_states, double epsilon, double eta = 0.1,
                            double gamma = 0.9);

// Replays a history prefix into a fresh copy of the policy.
void replay(Policy& p, const Dataset& d, int prefix_len);

// Wraps a policy so that it sees responses with a location (or scale)
// modification undone before updating its statistics.  The assignment law of
// a response-modified dataset is the original algorithm applied to the
// un-modified history, so inverted tests must evaluate likelihoods through
// this wrapper.
PolicyPtr make_unshift_policy(const Policy& base, double delta, ActionId x,
                              bool scale_family);

// Uniform probabilities over the argmax set of `scores`.
void argmax_probs(const std::vector<double>& scores, std::vector<double>& out);

}  // namespace adaptrt
