#include "adaptrt/inference.hpp"

#include <cmath>
#include <map>

#include "adaptrt/errors.hpp"
#include "adaptrt/stats.hpp"

namespace adaptrt {

EnvClass env_class_from_name(const std::string& name) {
  if (name == "non_reactive") return EnvClass::NonReactive;
  if (name == "mdp") return EnvClass::Mdp;
  if (name == "stationary_non_reactive") return EnvClass::StationaryNonReactive;
  if (name == "stationary_mdp") return EnvClass::StationaryMdp;
  if (name == "c_stationary_strong_non_reactive")
    return EnvClass::CStationaryStrongNonReactive;
  throw ConfigError("unknown environment class: " + name);
}

std::string env_class_name(EnvClass e) {
  switch (e) {
    case EnvClass::NonReactive: return "non_reactive";
    case EnvClass::Mdp: return "mdp";
    case EnvClass::StationaryNonReactive: return "stationary_non_reactive";
    case EnvClass::StationaryMdp: return "stationary_mdp";
    case EnvClass::CStationaryStrongNonReactive:
      return "c_stationary_strong_non_reactive";
  }
  return "?";
}

void validate_cond_indep_pairing(EnvClass env, const Scheme& scheme) {
  if (!scheme.randomizes_actions())
    throw ConfigError("conditional-independence test needs an action-randomizing "
                      "scheme, got " + scheme.name());
  switch (env) {
    case EnvClass::NonReactive:
    case EnvClass::Mdp:
      // Non-stationary response law: no permutation is allowed.
      if (scheme.kind != SchemeKind::ImitationX)
        throw ConfigError("only imitation_x is valid in " + env_class_name(env));
      if (scheme.mdp != (env == EnvClass::Mdp))
        throw ConfigError("scheme mdp flag disagrees with environment");
      return;
    case EnvClass::StationaryNonReactive:
      if (scheme.mdp)
        throw ConfigError("bandit environment needs bandit-mode schemes");
      return;
    case EnvClass::StationaryMdp:
      if (!scheme.mdp)
        throw ConfigError("stationary MDP needs chain-restricted schemes");
      return;
    case EnvClass::CStationaryStrongNonReactive:
      throw ConfigError(
          "conditional-independence testing is not defined for "
          "c_stationary_strong_non_reactive without Y-stationarity");
  }
}

void validate_nonstationarity_pairing(EnvClass env, const Scheme& scheme) {
  if (scheme.randomizes_actions())
    throw ConfigError("non-stationarity test admits no action randomization, got " +
                      scheme.name());
  switch (env) {
    case EnvClass::CStationaryStrongNonReactive:
      if (scheme.mdp)
        throw ConfigError("bandit environment needs bandit-mode schemes");
      return;
    case EnvClass::Mdp:
      if (!scheme.mdp)
        throw ConfigError("MDP environment needs chain-restricted schemes");
      return;
    default:
      throw ConfigError("non-stationarity test is defined for "
                        "c_stationary_strong_non_reactive or mdp environments");
  }
}

namespace {

TestOutcome run_driver(const Dataset& d, const Policy& policy, const Scheme& scheme,
                       int m, const Statistic& s,
                       const std::vector<ExoDraw>* u_record, Rng& rng,
                       const TestDriverOptions& opts) {
  if (opts.use_mcmc) {
    McmcOptions mo;
    mo.steps_per_member = opts.mcmc_steps_per_member;
    mo.require_last_action = opts.require_last_action;
    return mcmc_test(d, scheme, policy, m, s, u_record, rng, mo);
  }
  WeightedTestOptions wo;
  wo.require_last_action = opts.require_last_action;
  return weighted_mc_test(d, scheme, policy, m, s, u_record, rng, wo);
}

}  // namespace

TestOutcome cond_indep_test(const Dataset& d, const Policy& policy, const GMap& g,
                            EnvClass env, Scheme scheme, int m, const Statistic& s,
                            const std::vector<ExoDraw>* u_record, Rng& rng,
                            const TestDriverOptions& opts) {
  scheme.g = g;
  validate_cond_indep_pairing(env, scheme);
  return run_driver(d, policy, scheme, m, s, u_record, rng, opts);
}

TestOutcome nonstationarity_test(const Dataset& d, const Policy& policy,
                                 EnvClass env, const Scheme& scheme, int m,
                                 const Statistic& s,
                                 const std::vector<ExoDraw>* u_record, Rng& rng,
                                 const TestDriverOptions& opts) {
  validate_nonstationarity_pairing(env, scheme);
  return run_driver(d, policy, scheme, m, s, u_record, rng, opts);
}

// --- statistics --------------------------------------------------------------

namespace {

Eigen::MatrixXd build_design(const Dataset& d, DesignKind kind,
                             const std::vector<ActionId>& arms) {
  const int n = d.length();
  if (kind == DesignKind::ArmIndicators) {
    Eigen::MatrixXd x(n, 1 + static_cast<int>(arms.size()));
    for (int t = 0; t < n; ++t) {
      x(t, 0) = 1.0;
      for (std::size_t j = 0; j < arms.size(); ++j)
        x(t, 1 + static_cast<int>(j)) = d.at(t).action == arms[j] ? 1.0 : 0.0;
    }
    return x;
  }
  const int dim = d.at(0).context.kind == Context::Kind::Vector
                      ? static_cast<int>(d.at(0).context.vec.size())
                      : 0;
  Eigen::MatrixXd x(n, 2 + dim);
  for (int t = 0; t < n; ++t) {
    x(t, 0) = 1.0;
    x(t, 1) = static_cast<double>(d.at(t).action);
    for (int j = 0; j < dim; ++j)
      x(t, 2 + j) = d.at(t).context.vec[static_cast<std::size_t>(j)];
  }
  return x;
}

Eigen::VectorXd responses(const Dataset& d) {
  Eigen::VectorXd y(d.length());
  for (int t = 0; t < d.length(); ++t) y(t) = d.at(t).response.as_real();
  return y;
}

}  // namespace

Statistic stat_abs_t(DesignKind design, std::vector<ActionId> indicator_arms,
                     int coef_index) {
  return [design, arms = std::move(indicator_arms), coef_index](const Dataset& d) {
    const Eigen::MatrixXd x = build_design(d, design, arms);
    return abs_t_stat(x, responses(d), coef_index);
  };
}

Statistic stat_abs_residual(const RegressorSpec& reg) {
  return [reg](const Dataset& d) {
    if (d.length() < 2)
      throw ArgumentError("stat_abs_residual: needs at least two observations");
    const Eigen::MatrixXd x = build_design(d, DesignKind::InterceptActionContext, {});
    const Eigen::VectorXd y = responses(d);
    Eigen::VectorXd beta;
    switch (reg.kind) {
      case RegressorKind::Ols:
        beta = ols_min_norm(x, y);
        break;
      case RegressorKind::Lasso: {
        std::vector<bool> pen(static_cast<std::size_t>(x.cols()), true);
        pen[0] = false;  // intercept unpenalized
        beta = Eigen::VectorXd::Zero(x.cols());
        lasso_cd(x, y, reg.lambda, pen, beta, reg.max_sweeps, reg.tol);
        break;
      }
      case RegressorKind::LassoCv: {
        std::vector<bool> pen(static_cast<std::size_t>(x.cols()), true);
        pen[0] = false;
        beta = lasso_cv(x, y, reg.lambda_grid, reg.folds, pen, nullptr,
                        reg.max_sweeps, reg.tol);
        break;
      }
    }
    const int last = d.length() - 1;
    return std::abs(y(last) - x.row(last).dot(beta));
  };
}

Statistic stat_mdp_nll(int n_states) {
  if (n_states < 1) throw ArgumentError("stat_mdp_nll: n_states must be >= 1");
  return [n_states](const Dataset& d) {
    if (d.at(0).response.kind != Response::Kind::State)
      throw ArgumentError("stat_mdp_nll: needs state-valued responses");
    std::map<std::pair<int, ActionId>, std::map<int, int>> counts;
    std::map<std::pair<int, ActionId>, int> totals;
    for (int t = 0; t < d.length(); ++t) {
      const Triple& z = d.at(t);
      const std::pair<int, ActionId> key{z.context.state, z.action};
      counts[key][z.response.state] += 1;
      totals[key] += 1;
    }
    const Triple& last = d.at(d.length() - 1);
    const std::pair<int, ActionId> key{last.context.state, last.action};
    const int seen = counts[key][last.response.state];
    const int total = totals[key];
    const double prob = (static_cast<double>(seen) + 1.0) /
                        (static_cast<double>(total) + static_cast<double>(n_states));
    return -std::log(prob);
  };
}

}  // namespace adaptrt
