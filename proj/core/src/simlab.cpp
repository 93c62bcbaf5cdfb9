#include "adaptrt/simlab.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "adaptrt/errors.hpp"
#include "adaptrt/parallel.hpp"

namespace adaptrt {

EnvKind env_kind_from_name(const std::string& name) {
  if (name == "contextual_cond_indep") return EnvKind::ContextualCondIndep;
  if (name == "three_arm_cond_indep") return EnvKind::ThreeArmCondIndep;
  if (name == "nonstat_contextless") return EnvKind::NonstatContextless;
  if (name == "nonstat_contextual_sparse") return EnvKind::NonstatContextualSparse;
  if (name == "nonstat_mdp") return EnvKind::NonstatMdp;
  if (name == "iid_triples") return EnvKind::IidTriples;
  throw ConfigError("unknown environment: " + name);
}

std::string env_kind_name(EnvKind k) {
  switch (k) {
    case EnvKind::ContextualCondIndep: return "contextual_cond_indep";
    case EnvKind::ThreeArmCondIndep: return "three_arm_cond_indep";
    case EnvKind::NonstatContextless: return "nonstat_contextless";
    case EnvKind::NonstatContextualSparse: return "nonstat_contextual_sparse";
    case EnvKind::NonstatMdp: return "nonstat_mdp";
    case EnvKind::IidTriples: return "iid_triples";
  }
  return "?";
}

int EnvSpec::n_actions() const {
  return kind == EnvKind::ThreeArmCondIndep ? 3 : 2;
}

int EnvSpec::context_dim() const {
  switch (kind) {
    case EnvKind::ContextualCondIndep: return 2;
    case EnvKind::NonstatContextualSparse: return 100;
    default: return 0;
  }
}

int EnvSpec::n_states() const {
  return kind == EnvKind::NonstatMdp || kind == EnvKind::IidTriples ? 3 : 0;
}

EnvClass env_class_for(EnvKind kind, bool nonstationarity_task) {
  switch (kind) {
    case EnvKind::ContextualCondIndep:
    case EnvKind::ThreeArmCondIndep:
      return EnvClass::StationaryNonReactive;
    case EnvKind::NonstatContextless:
    case EnvKind::NonstatContextualSparse:
    case EnvKind::IidTriples:
      return EnvClass::CStationaryStrongNonReactive;
    case EnvKind::NonstatMdp:
      return nonstationarity_task ? EnvClass::Mdp : EnvClass::StationaryMdp;
  }
  throw ArgumentError("env_class_for: unknown environment");
}

namespace {

int mod3(int v) { return ((v % 3) + 3) % 3; }

// +-1 treatment coding for the two-armed environments.
double arm_value(ActionId a) { return 2.0 * a - 1.0; }

int mdp_next_state(int state, ActionId action, bool swap_actions, Rng& rng) {
  const int v = static_cast<int>(arm_value(action));
  const int likely = swap_actions ? mod3(state - v) : mod3(state + v);
  const int unlikely = swap_actions ? mod3(state + v) : mod3(state - v);
  return rng.uniform() < 0.95 ? likely : unlikely;
}

}  // namespace

GenResult gen_env_data(const EnvSpec& spec, const Policy& policy, int horizon,
                       bool under_alternative, Rng& rng) {
  if (horizon < 1) throw ArgumentError("gen_env_data: horizon must be >= 1");
  PolicyPtr pol = policy.clone();
  pol->reset();
  std::vector<Triple> triples;
  std::vector<ExoDraw> trace;
  triples.reserve(static_cast<std::size_t>(horizon));

  switch (spec.kind) {
    case EnvKind::ContextualCondIndep: {
      for (int t = 0; t < horizon; ++t) {
        std::vector<double> c{1.0 + rng.normal(), -1.0 + rng.normal()};
        Triple z;
        z.context = Context::of_vector(std::move(c));
        ExoDraw u;
        z.action = pol->sample_action(z.context, rng, &u);
        trace.push_back(std::move(u));
        double mean = z.context.vec[0] + z.context.vec[1];
        if (under_alternative) mean += static_cast<double>(z.action);
        z.response = Response::of_real(mean + rng.normal());
        pol->observe(z);
        triples.push_back(std::move(z));
      }
      return {Dataset::bandit(std::move(triples)), std::move(trace)};
    }
    case EnvKind::ThreeArmCondIndep: {
      const auto& means = under_alternative ? spec.alt_means : spec.null_means;
      for (int t = 0; t < horizon; ++t) {
        Triple z;
        z.context = Context::empty();
        ExoDraw u;
        z.action = pol->sample_action(z.context, rng, &u);
        trace.push_back(std::move(u));
        z.response = Response::of_real(means[static_cast<std::size_t>(z.action)] +
                                       rng.normal());
        pol->observe(z);
        triples.push_back(std::move(z));
      }
      return {Dataset::bandit(std::move(triples)), std::move(trace)};
    }
    case EnvKind::NonstatContextless: {
      for (int t = 0; t < horizon; ++t) {
        Triple z;
        z.context = Context::empty();
        ExoDraw u;
        z.action = pol->sample_action(z.context, rng, &u);
        trace.push_back(std::move(u));
        const bool last = t + 1 == horizon;
        const double mean =
            (under_alternative && last ? 4.0 : 1.0) * arm_value(z.action);
        z.response = Response::of_real(mean + rng.normal());
        pol->observe(z);
        triples.push_back(std::move(z));
      }
      return {Dataset::bandit(std::move(triples)), std::move(trace)};
    }
    case EnvKind::NonstatContextualSparse: {
      const int dim = spec.context_dim();
      for (int t = 0; t < horizon; ++t) {
        std::vector<double> c(static_cast<std::size_t>(dim));
        for (double& v : c) v = 1.0 + rng.normal();
        Triple z;
        z.context = Context::of_vector(std::move(c));
        ExoDraw u;
        z.action = pol->sample_action(z.context, rng, &u);
        trace.push_back(std::move(u));
        const bool last = t + 1 == horizon;
        double mean = (under_alternative && last ? 5.0 : -5.0) * arm_value(z.action);
        for (int j = 0; j < 10; ++j) mean += z.context.vec[static_cast<std::size_t>(j)];
        z.response = Response::of_real(mean + rng.normal());
        pol->observe(z);
        triples.push_back(std::move(z));
      }
      return {Dataset::bandit(std::move(triples)), std::move(trace)};
    }
    case EnvKind::NonstatMdp: {
      int state = static_cast<int>(rng.uniform_int(3));
      for (int t = 0; t < horizon; ++t) {
        Triple z;
        z.context = Context::of_state(state);
        ExoDraw u;
        z.action = pol->sample_action(z.context, rng, &u);
        trace.push_back(std::move(u));
        const bool last = t + 1 == horizon;
        state = mdp_next_state(state, z.action, under_alternative && last, rng);
        z.response = Response::of_state(state);
        pol->observe(z);
        triples.push_back(std::move(z));
      }
      ExoDraw u;
      const ActionId trailing =
          pol->sample_action(Context::of_state(state), rng, &u);
      trace.push_back(std::move(u));
      return {Dataset::mdp(std::move(triples), trailing), std::move(trace)};
    }
    case EnvKind::IidTriples: {
      for (int t = 0; t < horizon; ++t) {
        Triple z;
        z.context = Context::of_state(static_cast<int>(rng.uniform_int(3)));
        ExoDraw u;
        z.action = pol->sample_action(z.context, rng, &u);
        trace.push_back(std::move(u));
        const bool last = t + 1 == horizon;
        z.response = Response::of_state(mdp_next_state(
            z.context.state, z.action, under_alternative && last, rng));
        pol->observe(z);
        triples.push_back(std::move(z));
      }
      return {Dataset::bandit(std::move(triples)), std::move(trace)};
    }
  }
  throw ArgumentError("gen_env_data: unknown environment");
}

PolicyPtr make_policy(const std::string& name, int k, int context_dim,
                      int n_states, const std::map<std::string, double>& params,
                      const std::vector<double>& bias) {
  const auto param = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "uniform_iid") return make_uniform_iid(k);
  if (name == "biased_iid") {
    if (static_cast<int>(bias.size()) != k)
      throw ConfigError("biased_iid: bias vector must have one entry per action");
    return make_biased_iid(bias);
  }
  if (name == "eps_greedy") return make_eps_greedy(k, param("epsilon", 0.1));
  if (name == "ucb") return make_ucb(k, param("c", 1.0));
  if (name == "eps_greedy_linear")
    return make_eps_greedy_linear(k, context_dim, param("epsilon", 0.1),
                                  param("lambda", 10.0));
  if (name == "linucb") return make_linucb(k, context_dim, param("alpha", 1.0));
  if (name == "q_greedy")
    return make_q_greedy(k, n_states, param("eta", 0.1), param("gamma", 0.9));
  if (name == "q_eps_greedy")
    return make_q_eps_greedy(k, n_states, param("epsilon", 0.1), param("eta", 0.1),
                             param("gamma", 0.9));
  throw ConfigError("unknown policy: " + name);
}

PolicyPtr make_policy_for_env(const std::string& name, const EnvSpec& env,
                              const std::map<std::string, double>& params,
                              const std::vector<double>& bias) {
  return make_policy(name, env.n_actions(), env.context_dim(), env.n_states(),
                     params, bias);
}

Statistic make_statistic(const StatisticChoice& c, int n_states) {
  if (c.name == "abs_t") {
    const DesignKind kind = c.design == "intercept_action_context"
                                ? DesignKind::InterceptActionContext
                                : DesignKind::ArmIndicators;
    return stat_abs_t(kind, std::vector<ActionId>(c.indicator_arms.begin(),
                                                  c.indicator_arms.end()),
                      c.coef_index);
  }
  if (c.name == "abs_residual") {
    RegressorSpec reg;
    if (c.regressor == "ols") reg.kind = RegressorKind::Ols;
    else if (c.regressor == "lasso") reg.kind = RegressorKind::Lasso;
    else if (c.regressor == "lasso_cv") reg.kind = RegressorKind::LassoCv;
    else throw ConfigError("unknown regressor: " + c.regressor);
    reg.lambda = c.lambda;
    reg.lambda_grid = c.lambda_grid;
    reg.folds = c.folds;
    return stat_abs_residual(reg);
  }
  if (c.name == "mdp_nll") return stat_mdp_nll(std::max(1, n_states));
  throw ConfigError("unknown statistic: " + c.name);
}

namespace {

GMap env_g(const EnvSpec& env) {
  switch (env.kind) {
    case EnvKind::ContextualCondIndep:
      return GMap::constant(2);
    case EnvKind::ThreeArmCondIndep:
      return GMap::indicator(3, 2);
    default:
      return GMap::constant(env.n_actions());
  }
}

bool is_cond_indep_env(EnvKind kind) {
  return kind == EnvKind::ContextualCondIndep || kind == EnvKind::ThreeArmCondIndep;
}

struct TrialResult {
  bool failed = false;
  double reject = 0.0;
  double frac_ess = 0.0;
  double covered = 0.0;
  double length = 0.0;
  double runtime_ms = 0.0;
};

struct Aggregate {
  double mean = 0.0, se = 0.0;
};

Aggregate aggregate_proportion(const std::vector<double>& v) {
  Aggregate a;
  if (v.empty()) return a;
  const double n = static_cast<double>(v.size());
  a.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  a.se = std::sqrt(std::max(0.0, a.mean * (1.0 - a.mean)) / n);
  return a;
}

Aggregate aggregate_mean(const std::vector<double>& v) {
  Aggregate a;
  if (v.empty()) return a;
  const double n = static_cast<double>(v.size());
  a.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - a.mean) * (x - a.mean);
  a.se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return a;
}

}  // namespace

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config) {
  std::vector<MetricsRow> rows;
  if (config.trials <= 0) return rows;
  const Rng master(config.seed);
  const Statistic statistic =
      make_statistic(config.statistic, config.env.n_states());
  const bool mdp_data = config.env.kind == EnvKind::NonstatMdp;
  const bool cond_indep = is_cond_indep_env(config.env.kind);
  const GMap g = env_g(config.env);

  std::uint64_t cell_index = 0;
  for (int horizon : config.horizons) {
    for (int m : config.m_list) {
      for (const auto& pchoice : config.policies) {
        for (const auto& scheme_name : config.schemes) {
          ++cell_index;
          const Scheme scheme =
              scheme_from_name(scheme_name, mdp_data, g, config.max_retries);
          const PolicyPtr policy =
              make_policy_for_env(pchoice.name, config.env, pchoice.params,
                                  pchoice.bias);

          std::vector<TrialResult> results(
              static_cast<std::size_t>(std::max(0, config.trials)));
          parallel_for(
              results.size(), config.threads, [&](std::size_t trial) {
                TrialResult& out = results[trial];
                Rng rng = master.split(cell_index, trial + 1);
                const PolicyPtr pol = policy->clone();
                try {
                  GenResult gen = gen_env_data(config.env, *pol, horizon,
                                               config.under_alternative, rng);
                  Rng test_rng = rng.split(0x7e57);
                  const auto start = std::chrono::steady_clock::now();
                  switch (config.task) {
                    case Task::Test: {
                      TestDriverOptions topts;
                      topts.use_mcmc = config.use_mcmc;
                      topts.mcmc_steps_per_member = config.mcmc_steps_per_member;
                      const EnvClass env_class =
                          env_class_for(config.env.kind, !cond_indep);
                      TestOutcome o =
                          cond_indep
                              ? cond_indep_test(gen.data, *pol, g, env_class,
                                                scheme, m, statistic,
                                                &gen.u_trace, test_rng, topts)
                              : nonstationarity_test(gen.data, *pol, env_class,
                                                     scheme, m, statistic,
                                                     &gen.u_trace, test_rng, topts);
                      Rng dec_rng = rng.split(0xdec1);
                      const bool reject =
                          config.smoothed
                              ? smoothed_decision(o.p, o.p_minus, config.alpha,
                                                  dec_rng)
                              : o.p <= config.alpha;
                      out.reject = reject ? 1.0 : 0.0;
                      out.frac_ess = o.frac_ess;
                      break;
                    }
                    case Task::Ci: {
                      const Grid grid = make_grid(config.ci_grid_kind, config.grid_lo,
                                                  config.grid_hi, config.grid_step);
                      InversionOptions iopts;
                      iopts.use_mcmc = config.use_mcmc;
                      iopts.mcmc_steps_per_member = config.mcmc_steps_per_member;
                      iopts.expansion_radius = config.expansion_radius;
                      const Region r = confidence_region(
                          gen.data, *pol, config.ci_x, config.ci_x_prime, grid,
                          config.alpha, env_class_for(config.env.kind, false),
                          scheme, m, statistic, &gen.u_trace, test_rng, iopts);
                      out.covered = r.contains(config.ci_true_delta) ? 1.0 : 0.0;
                      out.length = r.hull_length();
                      break;
                    }
                    case Task::Conformal:
                    case Task::ConformalShared: {
                      const Grid grid = make_grid(GridKind::Response, config.grid_lo,
                                                  config.grid_hi, config.grid_step);
                      const double true_y =
                          gen.data.at(gen.data.length() - 1).response.as_real();
                      const EnvClass env_class = env_class_for(config.env.kind, true);
                      Region r;
                      if (config.task == Task::ConformalShared) {
                        r = conformal_region_shared(gen.data, *pol, grid,
                                                    config.alpha, env_class, scheme,
                                                    m, statistic, &gen.u_trace,
                                                    test_rng);
                        r.expansion = config.expansion_radius;
                      } else {
                        InversionOptions iopts;
                        iopts.use_mcmc = config.use_mcmc;
                        iopts.mcmc_steps_per_member = config.mcmc_steps_per_member;
                        iopts.expansion_radius = config.expansion_radius;
                        r = conformal_region(gen.data, *pol, grid, config.alpha,
                                             env_class, scheme, m, statistic,
                                             &gen.u_trace, test_rng,
                                             config.conditional, iopts);
                      }
                      out.covered = (!r.empty() &&
                                     r.hull_lo - r.expansion <= true_y &&
                                     true_y <= r.hull_hi + r.expansion)
                                        ? 1.0
                                        : 0.0;
                      out.length = r.hull_length();
                      break;
                    }
                  }
                  const auto stop = std::chrono::steady_clock::now();
                  out.runtime_ms =
                      std::chrono::duration<double, std::milli>(stop - start).count();
                } catch (const TerminatedError&) {
                  out.failed = true;
                } catch (const DegenerateEnsembleError&) {
                  out.failed = true;
                }
              });

          int failures = 0;
          std::vector<double> rejects, fess, covered, lengths;
          for (const auto& r : results) {
            if (r.failed) {
              ++failures;
              continue;
            }
            rejects.push_back(r.reject);
            fess.push_back(r.frac_ess);
            covered.push_back(r.covered);
            lengths.push_back(r.length);
          }
          const bool aborted =
              failures * 100 > config.trials && config.trials > 0;  // >1%
          const int n_ok = static_cast<int>(rejects.size());

          const auto push = [&](const std::string& metric, const Aggregate& a) {
            MetricsRow row;
            row.env = env_kind_name(config.env.kind);
            row.horizon = horizon;
            row.m = m;
            row.scheme = scheme_name;
            row.policy = pchoice.name;
            row.metric = metric;
            row.value = aborted ? std::nan("") : a.mean;
            row.se = aborted ? std::nan("") : a.se;
            row.n_trials = n_ok;
            row.failures = failures;
            row.seed = config.seed;
            rows.push_back(std::move(row));
          };

          if (config.task == Task::Test) {
            push(config.under_alternative ? "power" : "type1",
                 aggregate_proportion(rejects));
            push("frac_ess", aggregate_mean(fess));
          } else {
            push("coverage", aggregate_proportion(covered));
            push("avg_length", aggregate_mean(lengths));
          }
        }
      }
    }
  }
  return rows;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
  os << "env,T,m,scheme,policy,metric,value,se,n_trials,failures,seed\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.env << ',' << r.horizon << ',' << r.m << ',' << r.scheme << ','
       << r.policy << ',' << r.metric << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", r.value);
    os << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", r.se);
    os << buf << ',' << r.n_trials << ',' << r.failures << ',' << r.seed << '\n';
  }
}

OracleResult exact_validity_oracle(const OracleConfig& config) {
  if (config.horizon < 1 || config.horizon > 6)
    throw ArgumentError("oracle: horizon must be in [1, 6] to stay enumerable");
  if (config.m < 0 || config.m > 3)
    throw ArgumentError("oracle: m must be in [0, 3]");
  if (config.test == "mcmc" && config.m < 1)
    throw ArgumentError("oracle: the MCMC test needs m >= 1");
  if (config.scheme != "uniform_pi" && config.scheme != "imitation_pi" &&
      config.scheme != "re_imitation_pi")
    throw ArgumentError("oracle: scheme must be a trace-free permutation sampler");

  const int t_len = config.horizon;
  const long n_datasets = 1L << (2 * t_len);  // (x, y) in {0,1}^2 per step
  const Scheme scheme = scheme_from_name(config.scheme, false, GMap::constant(2));
  const PolicyPtr policy = make_eps_greedy(2, config.epsilon);
  const Statistic statistic = stat_abs_residual(RegressorSpec{});
  const std::size_t n_alpha = config.alphas.size();

  std::vector<double> probs(static_cast<std::size_t>(n_datasets), 0.0);
  std::vector<std::vector<double>> sm_rate(static_cast<std::size_t>(n_datasets)),
      un_rate(static_cast<std::size_t>(n_datasets));

  const Rng master(config.seed);
  parallel_for(static_cast<std::size_t>(n_datasets), config.threads,
               [&](std::size_t di) {
    // Decode the (action, response) sequence and compute its exact null
    // probability under the adaptive assignment.
    std::vector<Triple> triples;
    PolicyPtr pol = policy->clone();
    pol->reset();
    double prob = 1.0;
    for (int t = 0; t < t_len; ++t) {
      const int x = static_cast<int>((di >> (2 * t)) & 1);
      const int y = static_cast<int>((di >> (2 * t + 1)) & 1);
      Triple z;
      z.context = Context::empty();
      z.action = x;
      z.response = Response::of_real(static_cast<double>(y));
      prob *= pol->action_prob(z.context, z.action);
      prob *= y == 1 ? config.theta[static_cast<std::size_t>(x)]
                     : 1.0 - config.theta[static_cast<std::size_t>(x)];
      pol->observe(z);
      triples.push_back(std::move(z));
    }
    probs[di] = prob;
    const Dataset data = Dataset::bandit(std::move(triples));

    std::vector<long> sm_count(n_alpha, 0), un_count(n_alpha, 0);
    for (int rep = 0; rep < config.reps; ++rep) {
      Rng rng = master.split(di, static_cast<std::uint64_t>(rep) + 1);
      TestOutcome o;
      if (config.test == "weighted") {
        o = weighted_mc_test(data, scheme, *policy, config.m, statistic, nullptr,
                             rng);
      } else if (config.test == "mcmc") {
        o = mcmc_test(data, scheme, *policy, config.m, statistic, nullptr, rng);
      } else if (config.test == "swap") {
        o = swap_weighted_mc_test(data, scheme, *policy, config.m, statistic,
                                  nullptr, rng);
      } else {
        throw ArgumentError("oracle: unknown test kind " + config.test);
      }
      const double v = rng.split(0xdec1).uniform();  // shared smoothing draw
      for (std::size_t ai = 0; ai < n_alpha; ++ai) {
        const double alpha = config.alphas[ai];
        bool reject;
        if (o.p_minus > alpha) reject = false;
        else if (o.p <= alpha) reject = true;
        else reject = v < (alpha - o.p_minus) / (o.p - o.p_minus);
        if (reject) sm_count[ai] += 1;
        if (o.p <= alpha) un_count[ai] += 1;
      }
    }
    sm_rate[di].resize(n_alpha);
    un_rate[di].resize(n_alpha);
    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
      sm_rate[di][ai] = static_cast<double>(sm_count[ai]) / config.reps;
      un_rate[di][ai] = static_cast<double>(un_count[ai]) / config.reps;
    }
  });

  OracleResult res;
  res.alphas = config.alphas;
  res.smoothed_rate.assign(n_alpha, 0.0);
  res.unsmoothed_rate.assign(n_alpha, 0.0);
  res.se.assign(n_alpha, 0.0);
  std::vector<double> se_un(n_alpha, 0.0);
  for (std::size_t di = 0; di < static_cast<std::size_t>(n_datasets); ++di) {
    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
      res.smoothed_rate[ai] += probs[di] * sm_rate[di][ai];
      res.unsmoothed_rate[ai] += probs[di] * un_rate[di][ai];
      res.se[ai] += probs[di] * probs[di] * sm_rate[di][ai] *
                    (1.0 - sm_rate[di][ai]) / config.reps;
      se_un[ai] += probs[di] * probs[di] * un_rate[di][ai] *
                   (1.0 - un_rate[di][ai]) / config.reps;
    }
  }
  bool ok = true;
  for (std::size_t ai = 0; ai < n_alpha; ++ai) {
    res.se[ai] = std::sqrt(res.se[ai]);
    se_un[ai] = std::sqrt(se_un[ai]);
    const double sm_dev = res.smoothed_rate[ai] - config.alphas[ai];
    const double un_dev = res.unsmoothed_rate[ai] - config.alphas[ai];
    res.max_smoothed_abs_dev = std::max(res.max_smoothed_abs_dev, std::abs(sm_dev));
    res.max_unsmoothed_dev = std::max(res.max_unsmoothed_dev, un_dev);
    if (std::abs(sm_dev) > 3.0 * res.se[ai] + 1e-12) ok = false;
    if (un_dev > 3.0 * se_un[ai] + 1e-12) ok = false;
  }
  res.within_tolerance = ok;
  return res;
}

}  // namespace adaptrt
