#include "adaptrt/inversion.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "adaptrt/errors.hpp"

namespace adaptrt {

Grid make_grid(GridKind kind, double lo, double hi, double step) {
  if (step <= 0.0 || hi < lo) throw ArgumentError("make_grid: bad range");
  Grid g;
  g.kind = kind;
  for (double v = lo; v <= hi + 1e-12; v += step) g.values.push_back(v);
  return g;
}

bool Region::contains(double v) const {
  for (double a : accepted)
    if (std::abs(a - v) <= expansion + 1e-9) return true;
  return false;
}

Dataset modify_location(const Dataset& d, double delta, ActionId x) {
  std::vector<Triple> triples = d.triples();
  for (auto& z : triples) {
    if (z.response.kind != Response::Kind::Real)
      throw ArgumentError("modify_location: real responses required");
    if (z.action == x) z.response.value += delta;
  }
  return Dataset::bandit(std::move(triples));
}

Dataset modify_scale(const Dataset& d, double delta, ActionId x) {
  if (delta <= 0.0) throw ArgumentError("modify_scale: delta must be positive");
  std::vector<Triple> triples = d.triples();
  for (auto& z : triples) {
    if (z.response.kind != Response::Kind::Real)
      throw ArgumentError("modify_scale: real responses required");
    if (z.action == x) z.response.value *= delta;
  }
  return Dataset::bandit(std::move(triples));
}

namespace {

void finalize(Region& r) {
  r.accepted.clear();
  for (const auto& pt : r.points)
    if (pt.accepted) r.accepted.push_back(pt.value);
  if (!r.accepted.empty()) {
    r.hull_lo = r.accepted.front();
    r.hull_hi = r.accepted.back();
  }
}

bool accept_outcome(const TestOutcome& out, double alpha, bool smoothed, Rng& rng) {
  if (!smoothed) return out.p > alpha;
  return !smoothed_decision(out.p, out.p_minus, alpha, rng);
}

Dataset complete_last_response(const Dataset& prefix, double y) {
  std::vector<Triple> triples = prefix.triples();
  if (prefix.is_mdp()) {
    triples.back().response = Response::of_state(static_cast<int>(std::lround(y)));
    return Dataset::mdp(std::move(triples), prefix.trailing_action());
  }
  triples.back().response = Response::of_real(y);
  return Dataset::bandit(std::move(triples));
}

}  // namespace

Region confidence_region(const Dataset& d, const Policy& policy, ActionId x,
                         ActionId x_prime, const Grid& grid, double alpha,
                         EnvClass env, const Scheme& scheme, int m,
                         const Statistic& s, const std::vector<ExoDraw>* u_record,
                         Rng& rng, const InversionOptions& opts) {
  if (grid.values.empty()) throw ArgumentError("confidence_region: empty grid");
  if (grid.kind == GridKind::Response)
    throw ArgumentError("confidence_region: location or scale grid required");
  const GMap g = GMap::pair_merge(scheme.g.actions() > 0 ? scheme.g.actions()
                                                         : policy.num_actions(),
                                  x, x_prime);
  Region region;
  for (std::size_t j = 0; j < grid.values.size(); ++j) {
    const double delta = grid.values[j];
    RegionPoint pt;
    pt.value = delta;
    Rng stream = rng.split(0x17ead, j);
    try {
      const Dataset modified = grid.kind == GridKind::Location
                                   ? modify_location(d, delta, x)
                                   : modify_scale(d, delta, x);
      // The modified process assigns actions from the un-modified history.
      const PolicyPtr shifted =
          make_unshift_policy(policy, delta, x, grid.kind == GridKind::Scale);
      TestDriverOptions topts;
      topts.use_mcmc = opts.use_mcmc;
      topts.mcmc_steps_per_member = opts.mcmc_steps_per_member;
      const TestOutcome out = cond_indep_test(modified, *shifted, g, env, scheme, m,
                                              s, u_record, stream, topts);
      pt.p = out.p;
      pt.accepted = accept_outcome(out, alpha, opts.smoothed, stream);
    } catch (const TerminatedError&) {
      pt.errored = true;
    } catch (const DegenerateEnsembleError&) {
      pt.errored = true;
    }
    region.points.push_back(pt);
  }
  region.expansion = opts.expansion_radius;
  finalize(region);
  return region;
}

Region conformal_region(const Dataset& prefix, const Policy& policy,
                        const Grid& grid, double alpha, EnvClass env,
                        const Scheme& scheme, int m, const Statistic& s,
                        const std::vector<ExoDraw>* u_record, Rng& rng,
                        bool conditional, const InversionOptions& opts) {
  if (grid.values.empty()) throw ArgumentError("conformal_region: empty grid");
  if (grid.kind != GridKind::Response)
    throw ArgumentError("conformal_region: response grid required");

  const ActionId last_action = prefix.at(prefix.length() - 1).action;
  Region region;
  for (std::size_t j = 0; j < grid.values.size(); ++j) {
    RegionPoint pt;
    pt.value = grid.values[j];
    Rng stream = rng.split(0xc0f0, j);
    try {
      const Dataset completed = complete_last_response(prefix, grid.values[j]);
      TestDriverOptions topts;
      topts.use_mcmc = opts.use_mcmc;
      topts.mcmc_steps_per_member = opts.mcmc_steps_per_member;
      if (conditional) topts.require_last_action = last_action;
      const TestOutcome out = nonstationarity_test(completed, policy, env, scheme,
                                                   m, s, u_record, stream, topts);
      pt.p = out.p;
      pt.accepted = accept_outcome(out, alpha, opts.smoothed, stream);
    } catch (const TerminatedError&) {
      pt.errored = true;
    } catch (const DegenerateEnsembleError&) {
      pt.errored = true;
    }
    region.points.push_back(pt);
  }
  region.expansion = opts.expansion_radius;
  finalize(region);
  return region;
}

Region conformal_region_shared(const Dataset& prefix, const Policy& policy,
                               const Grid& grid, double alpha, EnvClass env,
                               const Scheme& scheme, int m, const Statistic& s,
                               const std::vector<ExoDraw>* u_record, Rng& rng) {
  if (grid.values.empty()) throw ArgumentError("conformal_region_shared: empty grid");
  if (grid.kind != GridKind::Response)
    throw ArgumentError("conformal_region_shared: response grid required");
  validate_nonstationarity_pairing(env, scheme);
  if (!scheme.shared_conditional() || scheme.randomizes_actions())
    throw ConfigError(
        "conformal_region_shared: pool sharing needs a shared-conditional "
        "permutation scheme");

  const std::size_t ny = grid.values.size();

  // Pool: m permutations per grid value, each drawn with that value written
  // into the last response; the draw path probability doubles as the
  // denominator q'(id | permuted member).
  struct PoolEntry {
    Permutation perm;
    double log_q_draw;
    std::size_t j;
  };
  std::vector<PoolEntry> pool;
  pool.reserve(ny * static_cast<std::size_t>(m));
  std::vector<double> log_num(ny);  // q'(identity order | content with y_j at T)
  std::vector<Dataset> contents;
  contents.reserve(ny);

  for (std::size_t j = 0; j < ny; ++j) {
    contents.push_back(complete_last_response(prefix, grid.values[j]));
    const Dataset& content = contents.back();
    log_num[j] = scheme_log_prob_identity(scheme, policy, content, u_record);
    Rng stream = rng.split(0x5a11, j);
    for (int i = 1; i <= m; ++i) {
      Rng draw = stream.split(static_cast<std::uint64_t>(i));
      Resample r = sample_resample(content, scheme, policy, u_record, draw);
      // Invariance of q(.|member) across the pool underpins the O(m|Y|)
      // weights: the content-driven evaluator must reproduce the draw path
      // probability exactly.
      if (i == 1) {
        const double recomputed =
            scheme_log_prob(scheme, policy, content, r.perm, r.data, u_record);
        if (!(std::abs(recomputed - r.log_q_self) < 1e-9))
          throw ConfigError(
              "conformal_region_shared: q(.|member) is not pool-invariant for "
              "this scheme; shared weights are unavailable");
      }
      pool.push_back(PoolEntry{std::move(r.perm), r.log_q_self, j});
    }
  }

  Region region;
  for (std::size_t jy = 0; jy < ny; ++jy) {
    const double y = grid.values[jy];
    const Dataset d_y = complete_last_response(prefix, y);
    const double s0 = s(d_y);

    std::vector<double> logs;
    std::vector<double> stats;
    logs.reserve(pool.size() + 1);
    stats.reserve(pool.size() + 1);
    logs.push_back(fhat_log(d_y, policy));
    stats.push_back(s0);
    for (const auto& entry : pool) {
      const Dataset member = apply_permutation(d_y, entry.perm);
      logs.push_back(fhat_log(member, policy) + log_num[entry.j] - entry.log_q_draw);
      stats.push_back(s(member));
    }

    RegionPoint pt;
    pt.value = y;
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logs) mx = std::max(mx, v);
    if (mx == -std::numeric_limits<double>::infinity()) {
      pt.errored = true;
      region.points.push_back(pt);
      continue;
    }
    double total = 0.0, p = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      if (logs[i] == -std::numeric_limits<double>::infinity()) continue;
      const double w = std::exp(logs[i] - mx);
      total += w;
      if (stats[i] >= s0) p += w;
    }
    pt.p = p / total;
    pt.accepted = pt.p > alpha;
    region.points.push_back(pt);
  }
  finalize(region);
  return region;
}

void write_region_csv(const Region& r, std::ostream& os) {
  os << "value,p,accepted\n";
  for (const auto& pt : r.points) {
    os << pt.value << ',';
    if (pt.errored)
      os << "nan";
    else
      os << pt.p;
    os << ',' << (pt.accepted ? 1 : 0) << '\n';
  }
}

}  // namespace adaptrt
