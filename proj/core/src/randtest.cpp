#include "adaptrt/randtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adaptrt/errors.hpp"

namespace adaptrt {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v)
    if (x != kNegInf) s += std::exp(x - mx);
  return mx + std::log(s);
}
}  // namespace

double fhat_log(const Dataset& d, const Policy& policy) {
  PolicyPtr pol = policy.clone();
  pol->reset();
  double total = 0.0;
  if (!d.is_mdp()) {
    for (int t = 0; t < d.length(); ++t) {
      const Triple& z = d.at(t);
      const double p = pol->action_prob(z.context, z.action);
      if (p <= 0.0) return kNegInf;
      total += std::log(p);
      pol->observe(z);
    }
    return total;
  }
  for (int t = 0; t <= d.length(); ++t) {
    const auto pair = d.pair_at(t);
    const double p = pol->action_prob(Context::of_state(pair.first), pair.second);
    if (p <= 0.0) return kNegInf;
    total += std::log(p);
    if (t < d.length()) pol->observe(d.at(t));
  }
  return total;
}

std::vector<double> weights_from_logs(const std::vector<double>& log_fhat,
                                      const std::vector<double>& log_q_self) {
  if (log_fhat.size() != log_q_self.size() || log_fhat.empty())
    throw ArgumentError("weights_from_logs: size mismatch");
  const std::size_t n = log_fhat.size();
  std::vector<double> logs(n, kNegInf);
  double mx = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (log_fhat[i] == kNegInf) continue;
    logs[i] = log_fhat[i] - log_q_self[i];
    mx = std::max(mx, logs[i]);
  }
  if (mx == kNegInf)
    throw DegenerateEnsembleError("all ensemble members have zero likelihood");
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (logs[i] == kNegInf) continue;
    w[i] = std::exp(logs[i] - mx);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> non_iid_swap_weights(
    const std::vector<double>& log_fhat, const std::vector<Permutation>& sigma,
    const std::function<double(const Permutation&, int)>& log_joint) {
  const std::size_t n = log_fhat.size();
  if (n == 0) throw ArgumentError("non_iid_swap_weights: empty ensemble");
  std::vector<double> logs(n, kNegInf);
  double mx = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (log_fhat[i] == kNegInf) continue;
    std::vector<double> terms;
    for (const auto& pi : sigma) {
      if (pi.image.empty() || pi.image[0] != static_cast<int>(i)) continue;
      terms.push_back(log_joint(pi, static_cast<int>(i)));
    }
    if (terms.empty()) continue;  // no permutation places this member first
    const double lse = logsumexp(terms);
    if (lse == kNegInf) continue;
    logs[i] = log_fhat[i] + lse;
    mx = std::max(mx, logs[i]);
  }
  if (mx == kNegInf)
    throw DegenerateEnsembleError("swap weights: all members have zero mass");
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (logs[i] == kNegInf) continue;
    w[i] = std::exp(logs[i] - mx);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<Permutation> swap_sigma(int m) {
  std::vector<Permutation> sigma;
  sigma.push_back(Permutation::identity(m + 1));
  for (int i = 1; i <= m; ++i) {
    Permutation p = Permutation::identity(m + 1);
    std::swap(p.image[0], p.image[static_cast<std::size_t>(i)]);
    sigma.push_back(std::move(p));
  }
  return sigma;
}

double effective_sample_size(const std::vector<double>& weights) {
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  if (s2 <= 0.0) throw ArgumentError("effective_sample_size: zero weights");
  return s * s / s2;
}

namespace {

TestOutcome outcome_from_weights(std::vector<double> weights,
                                 const std::vector<double>& stats, int m,
                                 int n_terminated) {
  TestOutcome out;
  const double s0 = stats[0];
  double p = 0.0, pm = 0.0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (stats[i] >= s0) p += weights[i];
    if (stats[i] > s0) pm += weights[i];
  }
  out.p = std::min(1.0, p);
  out.p_minus = std::max(0.0, pm);
  out.ess = effective_sample_size(weights);
  out.frac_ess = m > 0 ? (out.ess - 1.0) / static_cast<double>(m) : 1.0;
  out.weights = std::move(weights);
  out.n_terminated = n_terminated;
  return out;
}

}  // namespace

TestOutcome weighted_mc_test(const Dataset& d, const Scheme& scheme,
                             const Policy& policy, int m, const Statistic& s,
                             const std::vector<ExoDraw>* u_record, Rng& rng,
                             const WeightedTestOptions& opts) {
  if (m < 0) throw ArgumentError("weighted_mc_test: m must be >= 0");
  std::vector<double> log_fhat, log_q, stats;
  log_fhat.reserve(static_cast<std::size_t>(m) + 1);
  log_q.reserve(static_cast<std::size_t>(m) + 1);
  stats.reserve(static_cast<std::size_t>(m) + 1);

  log_fhat.push_back(fhat_log(d, policy));
  log_q.push_back(scheme_log_prob_identity(scheme, policy, d, u_record));
  stats.push_back(s(d));

  int n_terminated = 0;
  for (int i = 1; i <= m; ++i) {
    Rng stream = rng.split(static_cast<std::uint64_t>(i));
    Resample r = sample_resample(d, scheme, policy, u_record, stream,
                                 opts.require_last_action);
    n_terminated += r.restarts;
    log_fhat.push_back(fhat_log(r.data, policy));
    log_q.push_back(r.log_q_self);
    stats.push_back(s(r.data));
  }

  return outcome_from_weights(weights_from_logs(log_fhat, log_q), stats, m,
                              n_terminated);
}

TestOutcome swap_weighted_mc_test(const Dataset& d, const Scheme& scheme,
                                  const Policy& policy, int m, const Statistic& s,
                                  const std::vector<ExoDraw>* u_record, Rng& rng) {
  if (m < 0) throw ArgumentError("swap_weighted_mc_test: m must be >= 0");
  std::vector<double> log_fhat, log_q, stats;
  log_fhat.push_back(fhat_log(d, policy));
  log_q.push_back(scheme_log_prob_identity(scheme, policy, d, u_record));
  stats.push_back(s(d));
  int n_terminated = 0;
  for (int i = 1; i <= m; ++i) {
    Rng stream = rng.split(static_cast<std::uint64_t>(i));
    Resample r = sample_resample(d, scheme, policy, u_record, stream);
    n_terminated += r.restarts;
    log_fhat.push_back(fhat_log(r.data, policy));
    log_q.push_back(r.log_q_self);
    stats.push_back(s(r.data));
  }

  // Conditionally i.i.d. joint evaluated at a permuted resample list: the
  // product of the members' shared-conditional path probabilities at the
  // permuted positions 1..m.
  const auto log_joint = [&](const Permutation& pi, int) {
    double total = 0.0;
    for (int k = 1; k <= m; ++k)
      total += log_q[static_cast<std::size_t>(pi.image[static_cast<std::size_t>(k)])];
    return total;
  };
  return outcome_from_weights(
      non_iid_swap_weights(log_fhat, swap_sigma(m), log_joint), stats, m,
      n_terminated);
}

bool smoothed_decision(double p, double p_minus, double alpha, Rng& rng) {
  if (!(0.0 <= p_minus && p_minus <= p && p <= 1.0))
    throw ArgumentError("smoothed_decision: need 0 <= p_minus <= p <= 1");
  if (alpha < 0.0 || alpha > 1.0)
    throw ArgumentError("smoothed_decision: alpha in [0,1]");
  if (p_minus > alpha) return false;
  if (p <= alpha) return true;
  return rng.uniform() < (alpha - p_minus) / (p - p_minus);
}

TestOutcome mcmc_test(const Dataset& d, const Scheme& proposal,
                      const Policy& policy, int m, const Statistic& s,
                      const std::vector<ExoDraw>* u_record, Rng& rng,
                      const McmcOptions& opts) {
  if (m < 1) throw ArgumentError("mcmc_test: m must be >= 1");
  if (opts.steps_per_member < 1)
    throw ArgumentError("mcmc_test: steps_per_member must be >= 1");

  const double s0 = s(d);
  const double lf0 = fhat_log(d, policy);
  const double lq0 = scheme_log_prob_identity(proposal, policy, d, u_record);

  int n_terminated = 0;
  int count_ge = 1, count_gt = 0;  // member 0 ties itself

  // One reversible kernel serves both directions: xi states on one side of
  // the observed data and m - xi on the other.
  const int xi = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m) + 1));
  for (int side = 0; side < 2; ++side) {
    const int steps = side == 0 ? xi : m - xi;
    double cur_lf = lf0, cur_lq = lq0;
    Resample cur;  // current state; data unused until first acceptance
    bool at_origin = true;
    for (int k = 0; k < steps; ++k) {
      for (int rep = 0; rep < opts.steps_per_member; ++rep) {
        Rng stream = rng.split(static_cast<std::uint64_t>(side),
                               static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(rep));
        Resample z = sample_resample(d, proposal, policy, u_record, stream,
                                     opts.require_last_action);
        n_terminated += z.restarts;
        const double lf_z = fhat_log(z.data, policy);
        if (lf_z == -std::numeric_limits<double>::infinity()) continue;
        const double lq_z = z.log_q_self;
        // min(1, fhat(z) q(cur|z) / (fhat(cur) q(z|cur))); q is shared across
        // the orbit so each state's own path probability enters both sides.
        const double log_acc = (lf_z + cur_lq) - (cur_lf + lq_z);
        if (log_acc >= 0.0 || stream.uniform() < std::exp(log_acc)) {
          cur = std::move(z);
          cur_lf = lf_z;
          cur_lq = lq_z;
          at_origin = false;
        }
      }
      const double sv = at_origin ? s0 : s(cur.data);
      if (sv >= s0) ++count_ge;
      if (sv > s0) ++count_gt;
    }
  }

  TestOutcome out;
  const double denom = static_cast<double>(m + 1);
  out.p = static_cast<double>(count_ge) / denom;
  out.p_minus = static_cast<double>(count_gt) / denom;
  out.weights.assign(static_cast<std::size_t>(m) + 1, 1.0 / denom);
  out.ess = denom;
  out.frac_ess = 1.0;
  out.n_terminated = n_terminated;
  return out;
}

}  // namespace adaptrt
