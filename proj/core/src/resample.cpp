#include "adaptrt/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "adaptrt/errors.hpp"

namespace adaptrt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Scheme predicates.

bool kind_randomizes_actions(SchemeKind k) {
  switch (k) {
    case SchemeKind::ImitationX:
    case SchemeKind::UniformPermImitationX:
    case SchemeKind::RestrictedUniformPermImitationX:
    case SchemeKind::CombinedPermX:
      return true;
    default:
      return false;
  }
}

bool kind_permutes(SchemeKind k) { return k != SchemeKind::ImitationX; }

}  // namespace

bool Scheme::randomizes_actions() const { return kind_randomizes_actions(kind); }
bool Scheme::permutes() const { return kind_permutes(kind); }
bool Scheme::needs_u_record() const { return kind == SchemeKind::CondImitationPerm; }
bool Scheme::needs_decomposition() const {
  return kind == SchemeKind::ReImitationPerm || kind == SchemeKind::CondImitationPerm;
}

std::string Scheme::name() const {
  switch (kind) {
    case SchemeKind::UniformPerm: return "uniform_pi";
    case SchemeKind::ImitationPerm: return "imitation_pi";
    case SchemeKind::ReImitationPerm: return "re_imitation_pi";
    case SchemeKind::CondImitationPerm: return "cond_imitation_pi";
    case SchemeKind::ImitationX: return "imitation_x";
    case SchemeKind::UniformPermImitationX: return "uniform_pi_imitation_x";
    case SchemeKind::RestrictedUniformPermImitationX:
      return "restricted_uniform_pi_imitation_x";
    case SchemeKind::CombinedPermX: return "combined_pi_x";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name, bool mdp, GMap g, int max_retries) {
  Scheme s;
  s.mdp = mdp;
  s.g = std::move(g);
  s.max_retries = max_retries;
  if (name == "uniform_pi") s.kind = SchemeKind::UniformPerm;
  else if (name == "imitation_pi") s.kind = SchemeKind::ImitationPerm;
  else if (name == "re_imitation_pi") s.kind = SchemeKind::ReImitationPerm;
  else if (name == "cond_imitation_pi") s.kind = SchemeKind::CondImitationPerm;
  else if (name == "imitation_x") s.kind = SchemeKind::ImitationX;
  else if (name == "uniform_pi_imitation_x") s.kind = SchemeKind::UniformPermImitationX;
  else if (name == "restricted_uniform_pi_imitation_x")
    s.kind = SchemeKind::RestrictedUniformPermImitationX;
  else if (name == "combined_pi_x") s.kind = SchemeKind::CombinedPermX;
  else throw ConfigError("unknown scheme name: " + name);
  return s;
}

namespace {

// ---------------------------------------------------------------------------
// Unit access.  Bandit units are triples; MDP units are the T+1 state-action
// pairs of the augmented dataset.

struct Units {
  const Dataset& d;
  bool mdp;
  std::vector<Context> state_contexts;  // materialized once for MDP pairs

  Units(const Dataset& data, bool is_mdp) : d(data), mdp(is_mdp) {
    if (mdp) {
      state_contexts.reserve(static_cast<std::size_t>(d.unit_count()));
      for (int s = 0; s < d.unit_count(); ++s)
        state_contexts.push_back(Context::of_state(d.pair_at(s).first));
    }
  }

  int count() const { return d.unit_count(); }
  const Context& context(int s) const {
    return mdp ? state_contexts[static_cast<std::size_t>(s)] : d.at(s).context;
  }
  int state(int s) const { return d.pair_at(s).first; }
  ActionId action(int s) const { return mdp ? d.pair_at(s).second : d.at(s).action; }
  Response response(int s) const { return d.at(s).response; }  // bandit only
};

// Rebuild a dataset from unit order and (possibly redrawn) actions.
Dataset rebuild(const Units& u, const std::vector<int>& order,
                const std::vector<ActionId>& actions) {
  if (!u.mdp) {
    std::vector<Triple> triples;
    triples.reserve(order.size());
    for (std::size_t t = 0; t < order.size(); ++t) {
      Triple z = u.d.at(order[t]);
      z.action = actions[t];
      triples.push_back(std::move(z));
    }
    return Dataset::bandit(std::move(triples));
  }
  std::vector<Triple> triples;
  triples.reserve(order.size() - 1);
  for (std::size_t t = 0; t + 1 < order.size(); ++t) {
    Triple z;
    z.context = Context::of_state(u.state(order[t]));
    z.action = actions[t];
    z.response = Response::of_state(u.state(order[t + 1]));
    triples.push_back(std::move(z));
  }
  return Dataset::mdp(std::move(triples), actions.back());
}

// 0-based successor lookup: succ[(state, original action)] lists units whose
// predecessor pair matches.
using Succ = std::map<std::pair<int, ActionId>, std::vector<int>>;

Succ successors0(const Units& u) {
  Succ out;
  for (int s = 1; s < u.count(); ++s)
    out[{u.state(s - 1), u.action(s - 1)}].push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Mode control: one code path serves both drawing and path evaluation.

struct WalkCtl {
  Rng* rng = nullptr;                      // draw mode when set
  const Permutation* cand_perm = nullptr;  // eval mode
  const Dataset* cand_data = nullptr;
  double log_q = 0.0;
  bool infeasible = false;

  bool drawing() const { return rng != nullptr; }

  ActionId cand_action(int position) const {
    if (!cand_data->is_mdp()) return cand_data->at(position).action;
    return cand_data->pair_at(position).second;
  }
};

// Exogenous decision evaluated against a precomputed greedy mask, so the
// policy scores each candidate context once per step rather than once per
// support atom.
ActionId decide_masked(const ExoDraw& u, const std::vector<char>& mask) {
  if (u.direct >= 0) return u.direct;
  if (u.explore) return u.order.front();
  for (ActionId a : u.order)
    if (mask[static_cast<std::size_t>(a)]) return a;
  return u.order.front();
}

// ---------------------------------------------------------------------------
// Walk state: remaining units plus the policy advanced along the resampled
// prefix.  MDP mode threads transitions and evaluates candidates through a
// one-step lookahead (the transition into the candidate's state is observed
// before its action is selected).

struct WalkState {
  const Units& units;
  PolicyPtr pol;
  std::vector<int> rem;
  bool mdp;
  Succ succ;                      // MDP only
  int prev_unit = -1;             // MDP only
  ActionId prev_action = -1;      // current (possibly redrawn) action
  mutable std::map<int, PolicyPtr> lookahead_;  // by next state
  mutable std::vector<double> shared_probs_;
  mutable std::vector<double> scratch_probs_;
  mutable bool shared_valid_ = false;

  WalkState(const Units& u, const Policy& p, bool is_mdp)
      : units(u), pol(p.clone()), mdp(is_mdp) {
    pol->reset();
    if (mdp) succ = successors0(u);
  }

  // Action probabilities for a candidate unit under the current walk state.
  // Contextless bandit data shares one evaluation across every candidate of
  // a step; the buffer is invalidated by advance().
  const std::vector<double>& probs_at(int unit) const {
    const Context& c = units.context(unit);
    if (!mdp && c.kind == Context::Kind::Empty) {
      if (!shared_valid_) {
        pol->action_probs(c, shared_probs_);
        shared_valid_ = true;
      }
      return shared_probs_;
    }
    eval_policy(unit).action_probs(c, scratch_probs_);
    return scratch_probs_;
  }

  // Units eligible at the current step.
  std::vector<int> allowed() const {
    if (!mdp) return rem;
    auto it = succ.find({units.state(prev_unit), units.action(prev_unit)});
    if (it == succ.end()) return {};
    std::vector<int> out;
    for (int s : it->second)
      if (std::find(rem.begin(), rem.end(), s) != rem.end()) out.push_back(s);
    return out;
  }

  // Policy holding the state after observing the transition into `unit`'s
  // state (MDP); bandit mode (or the fixed first pair) returns the live
  // policy.
  const Policy& eval_policy(int unit) const {
    if (!mdp || prev_unit < 0) return *pol;
    const int ns = units.state(unit);
    auto it = lookahead_.find(ns);
    if (it == lookahead_.end()) {
      PolicyPtr c = pol->clone();
      Triple z;
      z.context = Context::of_state(units.state(prev_unit));
      z.action = prev_action;
      z.response = Response::of_state(ns);
      c->observe(z);
      it = lookahead_.emplace(ns, std::move(c)).first;
    }
    return *it->second;
  }

  void start_mdp(ActionId first_action) {
    prev_unit = 0;
    prev_action = first_action;
    rem.clear();
    for (int s = 1; s < units.count(); ++s) rem.push_back(s);
  }

  void start_bandit() {
    rem.clear();
    for (int s = 0; s < units.count(); ++s) rem.push_back(s);
  }

  void advance(int unit, ActionId action) {
    shared_valid_ = false;
    if (!mdp) {
      Triple z = units.d.at(unit);
      z.action = action;
      pol->observe(z);
    } else {
      Triple z;
      z.context = Context::of_state(units.state(prev_unit));
      z.action = prev_action;
      z.response = Response::of_state(units.state(unit));
      pol->observe(z);
      prev_unit = unit;
      prev_action = action;
    }
    rem.erase(std::find(rem.begin(), rem.end(), unit));
    lookahead_.clear();
  }
};

// Greedy mask of the policy that would pick `unit`'s action, honoring the
// MDP lookahead.
void greedy_mask_for(const WalkState& st, int unit, std::vector<char>& mask) {
  const std::vector<double>& probs = st.probs_at(unit);
  // argmax entries are exactly those with maximal probability
  double best = 0.0;
  for (double v : probs) best = std::max(best, v);
  mask.assign(probs.size(), 0);
  for (std::size_t a = 0; a < probs.size(); ++a)
    if (probs[a] == best) mask[a] = 1;
}

// P_A(original action of unit | context of unit) under the walk state.
double unit_action_prob(const WalkState& st, int unit) {
  return st.probs_at(unit)[static_cast<std::size_t>(st.units.action(unit))];
}

// Sum of P_A over the g-group of the unit's original action; `probs_out`
// exposes the per-action probabilities for the action-randomization stage.
double unit_group_prob(const WalkState& st, const GMap& g, int unit,
                       const std::vector<double>** probs_out) {
  const std::vector<double>& probs = st.probs_at(unit);
  const int group = g.group_of(st.units.action(unit));
  double total = 0.0;
  for (ActionId a : g.group_members(group)) total += probs[static_cast<std::size_t>(a)];
  if (probs_out) *probs_out = &probs;
  return total;
}

// ---------------------------------------------------------------------------
// Step primitives shared by draw and eval paths.

int choose_weighted(WalkCtl& ctl, int position, const std::vector<int>& ids,
                    const std::vector<double>& w, double total) {
  if (total <= 0.0) {
    ctl.infeasible = true;
    return -1;
  }
  if (ctl.drawing()) {
    const int at = ctl.rng->categorical(w, total);
    ctl.log_q += std::log(w[static_cast<std::size_t>(at)] / total);
    return ids[static_cast<std::size_t>(at)];
  }
  const int unit = ctl.cand_perm->image[static_cast<std::size_t>(position)];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == unit) {
      if (w[i] <= 0.0) break;
      ctl.log_q += std::log(w[i] / total);
      return unit;
    }
  }
  ctl.infeasible = true;
  return -1;
}

ActionId choose_action(WalkCtl& ctl, int position, const std::vector<ActionId>& members,
                       const std::vector<double>& w, double total) {
  if (total <= 0.0) {
    ctl.infeasible = true;
    return -1;
  }
  if (ctl.drawing()) {
    const int at = ctl.rng->categorical(w, total);
    ctl.log_q += std::log(w[static_cast<std::size_t>(at)] / total);
    return members[static_cast<std::size_t>(at)];
  }
  const ActionId a = ctl.cand_action(position);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] == a) {
      if (w[i] <= 0.0) break;
      ctl.log_q += std::log(w[i] / total);
      return a;
    }
  }
  ctl.infeasible = true;
  return -1;
}

// ---------------------------------------------------------------------------
// Permutation-family steps.  Each returns the chosen unit or -1.

int step_uniform(WalkCtl& ctl, int position, const WalkState& st) {
  const std::vector<int> ids = st.allowed();
  if (ids.empty()) {
    ctl.infeasible = true;
    return -1;
  }
  // The bandit stage is a plain uniform permutation whose probability is the
  // same for every candidate, so only the MDP (order-dependent) factor is
  // accumulated.
  if (ctl.drawing()) {
    const int unit = ids[static_cast<std::size_t>(ctl.rng->uniform_int(ids.size()))];
    if (st.mdp) ctl.log_q -= std::log(static_cast<double>(ids.size()));
    return unit;
  }
  const int unit = ctl.cand_perm->image[static_cast<std::size_t>(position)];
  if (std::find(ids.begin(), ids.end(), unit) == ids.end()) {
    ctl.infeasible = true;
    return -1;
  }
  if (st.mdp) ctl.log_q -= std::log(static_cast<double>(ids.size()));
  return unit;
}

int step_imitation(WalkCtl& ctl, int position, const WalkState& st) {
  const std::vector<int> ids = st.allowed();
  std::vector<double> w(ids.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    w[i] = unit_action_prob(st, ids[i]);
    total += w[i];
  }
  return choose_weighted(ctl, position, ids, w, total);
}

int step_re_imitation(WalkCtl& ctl, int position, const WalkState& st,
                      const USupport& support) {
  const std::vector<int> ids = st.allowed();
  if (ids.empty()) {
    ctl.infeasible = true;
    return -1;
  }
  std::vector<std::vector<char>> masks(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) greedy_mask_for(st, ids[i], masks[i]);

  // match[u][i] = 1 iff the decision rule under atom u reproduces unit i's
  // action at unit i's context.
  std::vector<std::vector<char>> match(support.size());
  std::vector<int> m_size(support.size(), 0);
  double p_feasible = 0.0;
  for (std::size_t ui = 0; ui < support.size(); ++ui) {
    match[ui].assign(ids.size(), 0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (decide_masked(support[ui].value, masks[i]) == st.units.action(ids[i])) {
        match[ui][i] = 1;
        m_size[ui] += 1;
      }
    }
    if (m_size[ui] > 0) p_feasible += support[ui].prob;
  }
  if (p_feasible <= 0.0) {
    ctl.infeasible = true;
    return -1;
  }

  auto marginal = [&](std::size_t i) {
    double p = 0.0;
    for (std::size_t ui = 0; ui < support.size(); ++ui)
      if (match[ui][i]) p += support[ui].prob / m_size[ui];
    return p / p_feasible;
  };

  if (ctl.drawing()) {
    double r = ctl.rng->uniform() * p_feasible;
    std::size_t ui = 0;
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (m_size[k] == 0) continue;
      ui = k;  // last feasible atom absorbs any rounding slack
      r -= support[k].prob;
      if (r < 0.0) break;
    }
    std::vector<int> pool;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (match[ui][i]) pool.push_back(static_cast<int>(i));
    const int at = pool[static_cast<std::size_t>(ctl.rng->uniform_int(pool.size()))];
    ctl.log_q += std::log(marginal(static_cast<std::size_t>(at)));
    return ids[static_cast<std::size_t>(at)];
  }

  const int unit = ctl.cand_perm->image[static_cast<std::size_t>(position)];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != unit) continue;
    const double p = marginal(i);
    if (p <= 0.0) break;
    ctl.log_q += std::log(p);
    return unit;
  }
  ctl.infeasible = true;
  return -1;
}

int step_cond_imitation(WalkCtl& ctl, int position, const WalkState& st,
                        const ExoDraw& u) {
  const std::vector<int> ids = st.allowed();
  std::vector<int> pool;
  std::vector<char> mask;
  for (int s : ids) {
    greedy_mask_for(st, s, mask);
    if (decide_masked(u, mask) == st.units.action(s)) pool.push_back(s);
  }
  if (pool.empty()) {
    ctl.infeasible = true;
    return -1;
  }
  if (ctl.drawing()) {
    ctl.log_q -= std::log(static_cast<double>(pool.size()));
    return pool[static_cast<std::size_t>(ctl.rng->uniform_int(pool.size()))];
  }
  const int unit = ctl.cand_perm->image[static_cast<std::size_t>(position)];
  if (std::find(pool.begin(), pool.end(), unit) == pool.end()) {
    ctl.infeasible = true;
    return -1;
  }
  ctl.log_q -= std::log(static_cast<double>(pool.size()));
  return unit;
}

// Combined step: pick a unit by the policy mass of its g-group, then redraw
// its action within the group.
std::pair<int, ActionId> step_combined(WalkCtl& ctl, int position, const WalkState& st,
                                       const GMap& g) {
  const std::vector<int> ids = st.allowed();
  std::vector<double> w(ids.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    w[i] = unit_group_prob(st, g, ids[i], nullptr);
    total += w[i];
  }
  const int unit = choose_weighted(ctl, position, ids, w, total);
  if (unit < 0) return {-1, -1};
  const std::vector<double>* probs = nullptr;
  unit_group_prob(st, g, unit, &probs);
  const auto& members = g.group_members(g.group_of(st.units.action(unit)));
  std::vector<double> aw(members.size());
  double atotal = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    aw[i] = (*probs)[static_cast<std::size_t>(members[i])];
    atotal += aw[i];
  }
  const ActionId a = choose_action(ctl, position, members, aw, atotal);
  return {unit, a};
}

// Action redraw of the imitation_X stage at a fixed unit.
ActionId step_imitation_x(WalkCtl& ctl, int position, const WalkState& st,
                          const GMap& g, int unit) {
  const std::vector<double>* probs = nullptr;
  unit_group_prob(st, g, unit, &probs);
  const auto& members = g.group_members(g.group_of(st.units.action(unit)));
  std::vector<double> aw(members.size());
  double atotal = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    aw[i] = (*probs)[static_cast<std::size_t>(members[i])];
    atotal += aw[i];
  }
  return choose_action(ctl, position, members, aw, atotal);
}

// ---------------------------------------------------------------------------
// Stage-1 permutations for the two-stage schemes.

bool stage1_perm(WalkCtl& ctl, const Scheme& scheme, const Units& units,
                 std::vector<int>& order, Rng* rng) {
  const int n = units.count();
  const bool restricted =
      scheme.kind == SchemeKind::RestrictedUniformPermImitationX;

  if (!scheme.mdp) {
    if (ctl.drawing()) {
      order.resize(static_cast<std::size_t>(n));
      for (int t = 0; t < n; ++t) order[static_cast<std::size_t>(t)] = t;
      if (!restricted) {
        for (int t = n - 1; t > 0; --t)
          std::swap(order[static_cast<std::size_t>(t)],
                    order[rng->uniform_int(static_cast<std::uint64_t>(t) + 1)]);
      } else {
        // Shuffle units within each g-group; positions keep their g-value.
        std::map<int, std::vector<int>> groups;
        for (int t = 0; t < n; ++t)
          groups[scheme.g.group_of(units.action(t))].push_back(t);
        for (auto& [gv, members] : groups) {
          std::vector<int> shuffled = members;
          for (std::size_t t = shuffled.size(); t > 1; --t)
            std::swap(shuffled[t - 1], shuffled[rng->uniform_int(t)]);
          for (std::size_t i = 0; i < members.size(); ++i)
            order[static_cast<std::size_t>(members[i])] = shuffled[i];
        }
      }
      return true;
    }
    // Evaluation: uniform stages contribute a candidate-invariant constant;
    // only feasibility is checked.
    order = ctl.cand_perm->image;
    if (restricted) {
      for (int t = 0; t < n; ++t) {
        if (scheme.g.group_of(units.action(order[static_cast<std::size_t>(t)])) !=
            scheme.g.group_of(units.action(t))) {
          ctl.infeasible = true;
          return false;
        }
      }
    }
    return true;
  }

  // MDP stage: sequential uniform over chain successors (optionally matching
  // the original position's g-value); the factor is order-dependent and is
  // accumulated.
  if (!ctl.drawing() && ctl.cand_perm->image[0] != 0) {
    ctl.infeasible = true;
    return false;
  }
  const Succ succ = successors0(units);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  order.assign(static_cast<std::size_t>(n), 0);
  used[0] = 1;
  int prev = 0;
  for (int t = 1; t < n; ++t) {
    auto it = succ.find({units.state(prev), units.action(prev)});
    std::vector<int> ids;
    if (it != succ.end()) {
      for (int s : it->second) {
        if (used[static_cast<std::size_t>(s)]) continue;
        if (restricted &&
            scheme.g.group_of(units.action(s)) != scheme.g.group_of(units.action(t)))
          continue;
        ids.push_back(s);
      }
    }
    if (ids.empty()) {
      ctl.infeasible = true;
      return false;
    }
    int unit;
    if (ctl.drawing()) {
      unit = ids[static_cast<std::size_t>(rng->uniform_int(ids.size()))];
    } else {
      unit = ctl.cand_perm->image[static_cast<std::size_t>(t)];
      if (std::find(ids.begin(), ids.end(), unit) == ids.end()) {
        ctl.infeasible = true;
        return false;
      }
    }
    ctl.log_q -= std::log(static_cast<double>(ids.size()));
    order[static_cast<std::size_t>(t)] = unit;
    used[static_cast<std::size_t>(unit)] = 1;
    prev = unit;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Whole-resample walks.

struct WalkOut {
  std::vector<int> order;
  std::vector<ActionId> actions;
};

// Permutation-only schemes (uniform / imitation / re-imitation /
// cond-imitation), bandit or MDP.
bool walk_perm_family(WalkCtl& ctl, const Scheme& scheme, const Policy& policy,
                      const Units& units, const std::vector<ExoDraw>* u_record,
                      WalkOut& out) {
  WalkState st(units, policy, scheme.mdp);
  USupport support;
  if (scheme.kind == SchemeKind::ReImitationPerm && policy.is_randomized())
    support = policy.u_support();

  const int n = units.count();
  out.order.clear();
  out.actions.clear();
  int start = 0;
  if (scheme.mdp) {
    // The first state-action pair stays fixed, which pins the initial state.
    if (!ctl.drawing() && ctl.cand_perm->image[0] != 0) {
      ctl.infeasible = true;
      return false;
    }
    st.start_mdp(units.action(0));
    out.order.push_back(0);
    out.actions.push_back(units.action(0));
    start = 1;
  } else {
    st.start_bandit();
  }

  for (int t = start; t < n; ++t) {
    int unit = -1;
    switch (scheme.kind) {
      case SchemeKind::UniformPerm:
        unit = step_uniform(ctl, t, st);
        break;
      case SchemeKind::ImitationPerm:
        unit = step_imitation(ctl, t, st);
        break;
      case SchemeKind::ReImitationPerm:
        // Deterministic policies have no randomness to regenerate; the
        // procedure coincides with imitation.
        unit = policy.is_randomized() ? step_re_imitation(ctl, t, st, support)
                                      : step_imitation(ctl, t, st);
        break;
      case SchemeKind::CondImitationPerm: {
        if (!u_record || static_cast<int>(u_record->size()) < n)
          throw ArgumentError("cond_imitation_pi requires the exogenous trace");
        unit = step_cond_imitation(ctl, t, st, (*u_record)[static_cast<std::size_t>(t)]);
        break;
      }
      default:
        throw ArgumentError("walk_perm_family: not a permutation scheme");
    }
    if (unit < 0) return false;
    out.order.push_back(unit);
    out.actions.push_back(units.action(unit));
    st.advance(unit, units.action(unit));
  }
  return true;
}

// imitation_X and the two-stage schemes: an optional stage-1 permutation
// followed by a positional action redraw.
bool walk_x_family(WalkCtl& ctl, const Scheme& scheme, const Policy& policy,
                   const Units& units, WalkOut& out) {
  const int n = units.count();
  std::vector<int> order;
  if (scheme.kind == SchemeKind::ImitationX) {
    order.resize(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) order[static_cast<std::size_t>(t)] = t;
    if (!ctl.drawing()) {
      for (int t = 0; t < n; ++t) {
        if (ctl.cand_perm->image[static_cast<std::size_t>(t)] != t) {
          ctl.infeasible = true;
          return false;
        }
      }
    }
  } else {
    if (!stage1_perm(ctl, scheme, units, order, ctl.rng)) return false;
  }

  WalkState st(units, policy, scheme.mdp);
  out.order = order;
  out.actions.assign(order.size(), 0);
  if (scheme.mdp) {
    // All T+1 actions are redrawn, including the first pair's.
    const ActionId a0 = step_imitation_x(ctl, 0, st, scheme.g, order[0]);
    if (a0 < 0) return false;
    out.actions[0] = a0;
    st.start_mdp(a0);
    for (int t = 1; t < n; ++t) {
      const int unit = order[static_cast<std::size_t>(t)];
      const ActionId a = step_imitation_x(ctl, t, st, scheme.g, unit);
      if (a < 0) return false;
      out.actions[static_cast<std::size_t>(t)] = a;
      st.advance(unit, a);
    }
    return true;
  }

  st.start_bandit();
  for (int t = 0; t < n; ++t) {
    const int unit = order[static_cast<std::size_t>(t)];
    const ActionId a = step_imitation_x(ctl, t, st, scheme.g, unit);
    if (a < 0) return false;
    out.actions[static_cast<std::size_t>(t)] = a;
    st.advance(unit, a);
  }
  return true;
}

bool walk_combined(WalkCtl& ctl, const Scheme& scheme, const Policy& policy,
                   const Units& units, WalkOut& out) {
  WalkState st(units, policy, scheme.mdp);
  const int n = units.count();
  out.order.clear();
  out.actions.clear();
  int start = 0;
  if (scheme.mdp) {
    if (!ctl.drawing() && ctl.cand_perm->image[0] != 0) {
      ctl.infeasible = true;
      return false;
    }
    // Redraw the first pair's action in place, then thread the chain.
    const ActionId a0 = step_imitation_x(ctl, 0, st, scheme.g, 0);
    if (a0 < 0) return false;
    st.start_mdp(a0);
    out.order.push_back(0);
    out.actions.push_back(a0);
    start = 1;
  } else {
    st.start_bandit();
  }
  for (int t = start; t < n; ++t) {
    const auto [unit, action] = step_combined(ctl, t, st, scheme.g);
    if (unit < 0) return false;
    out.order.push_back(unit);
    out.actions.push_back(action);
    st.advance(unit, action);
  }
  return true;
}

bool walk(WalkCtl& ctl, const Scheme& scheme, const Policy& policy,
          const Units& units, const std::vector<ExoDraw>* u_record, WalkOut& out) {
  switch (scheme.kind) {
    case SchemeKind::UniformPerm:
    case SchemeKind::ImitationPerm:
    case SchemeKind::ReImitationPerm:
    case SchemeKind::CondImitationPerm:
      return walk_perm_family(ctl, scheme, policy, units, u_record, out);
    case SchemeKind::ImitationX:
    case SchemeKind::UniformPermImitationX:
    case SchemeKind::RestrictedUniformPermImitationX:
      return walk_x_family(ctl, scheme, policy, units, out);
    case SchemeKind::CombinedPermX:
      return walk_combined(ctl, scheme, policy, units, out);
  }
  return false;
}

void validate_scheme_inputs(const Dataset& anchor, const Scheme& scheme,
                            const Policy& policy,
                            const std::vector<ExoDraw>* u_record) {
  if (scheme.mdp != anchor.is_mdp())
    throw ArgumentError("scheme mdp mode disagrees with dataset");
  if (scheme.randomizes_actions() && scheme.g.actions() < policy.num_actions())
    throw ArgumentError("scheme g-map does not cover the action space");
  if (scheme.kind == SchemeKind::ReImitationPerm && policy.is_randomized())
    policy.u_support();  // throws UnsupportedPolicyError if unregistered
  if (scheme.needs_u_record() &&
      (!u_record || static_cast<int>(u_record->size()) < anchor.unit_count()))
    throw ArgumentError("cond_imitation_pi requires the recorded exogenous trace");
}

}  // namespace

Resample sample_resample(const Dataset& anchor, const Scheme& scheme,
                         const Policy& policy,
                         const std::vector<ExoDraw>* u_record, Rng& rng,
                         std::optional<ActionId> require_last_action) {
  validate_scheme_inputs(anchor, scheme, policy, u_record);
  const Units units{anchor, scheme.mdp};

  for (int attempt = 0; attempt <= scheme.max_retries; ++attempt) {
    WalkCtl ctl;
    ctl.rng = &rng;
    WalkOut out;
    if (!walk(ctl, scheme, policy, units, u_record, out) || ctl.infeasible) continue;

    Resample r;
    r.perm.image = out.order;
    r.data = rebuild(units, out.order, out.actions);
    r.log_q_self = ctl.log_q;
    r.restarts = attempt;
    if (require_last_action &&
        r.data.at(r.data.length() - 1).action != *require_last_action)
      continue;
    return r;
  }
  throw TerminatedError("resampler exhausted " + std::to_string(scheme.max_retries) +
                        " restarts (" + scheme.name() + ")");
}

double scheme_log_prob(const Scheme& scheme, const Policy& policy,
                       const Dataset& content, const Permutation& cand_perm,
                       const Dataset& cand_data,
                       const std::vector<ExoDraw>* u_record) {
  validate_scheme_inputs(content, scheme, policy, u_record);
  if (cand_perm.size() != content.unit_count() || !cand_perm.is_valid())
    throw ArgumentError("scheme_log_prob: bad candidate permutation");
  const Units units{content, scheme.mdp};
  WalkCtl ctl;
  ctl.cand_perm = &cand_perm;
  ctl.cand_data = &cand_data;
  WalkOut out;
  if (!walk(ctl, scheme, policy, units, u_record, out) || ctl.infeasible)
    return kNegInf;
  return ctl.log_q;
}

double scheme_log_prob_identity(const Scheme& scheme, const Policy& policy,
                                const Dataset& content,
                                const std::vector<ExoDraw>* u_record) {
  return scheme_log_prob(scheme, policy, content,
                         Permutation::identity(content.unit_count()), content,
                         u_record);
}

bool resample_satisfies_constraints(const Resample& r, const Dataset& anchor,
                                    const Scheme& scheme) {
  if (r.perm.size() != anchor.unit_count() || !r.perm.is_valid()) return false;

  PermClassKind cls = PermClassKind::All;
  if (!scheme.permutes()) cls = PermClassKind::IdentityOnly;
  if (scheme.mdp && scheme.permutes()) cls = PermClassKind::MdpChain;
  if (!perm_class_contains(cls, r.perm, anchor, GMap::constant(1))) return false;

  const Units units{anchor, scheme.mdp};
  const Units runits{r.data, scheme.mdp};
  for (int t = 0; t < anchor.unit_count(); ++t) {
    const int src = r.perm.image[static_cast<std::size_t>(t)];
    if (!(runits.context(t) == units.context(src))) return false;
    if (!scheme.mdp &&
        !(runits.response(t) == units.response(src))) return false;
    if (scheme.randomizes_actions()) {
      if (scheme.g.group_of(runits.action(t)) != scheme.g.group_of(units.action(src)))
        return false;
    } else if (runits.action(t) != units.action(src)) {
      return false;
    }
  }
  return true;
}

}  // namespace adaptrt
