#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adaptrt/data.hpp"
#include "adaptrt/policy.hpp"
#include "adaptrt/rng.hpp"

namespace adaptrt {

// The resampling distributions q.  Permutation schemes reorder the data
// (sequentially restricted to chain successors in MDP mode); the X schemes
// redraw actions conditional on their g-evaluations; the two-stage and
// combined schemes do both.
enum class SchemeKind {
  UniformPerm,
  ImitationPerm,
  ReImitationPerm,
  CondImitationPerm,
  ImitationX,
  UniformPermImitationX,
  RestrictedUniformPermImitationX,
  CombinedPermX,
};

struct Scheme {
  SchemeKind kind = SchemeKind::UniformPerm;
  bool mdp = false;
  GMap g;  // used by the X-randomizing schemes
  int max_retries = 1000;

  bool randomizes_actions() const;
  bool permutes() const;
  bool needs_u_record() const;
  bool needs_decomposition() const;

  // True when q(.|anchor) is identical for every ensemble member: all schemes
  // here depend on the anchor only through a resample-invariant statistic
  // (the unit multiset, or the (C, g(X), Y) arrangement), which enables the
  // O(m) weight path.
  bool shared_conditional() const { return true; }

  std::string name() const;
};

Scheme scheme_from_name(const std::string& name, bool mdp, GMap g,
                        int max_retries = 1000);

// One draw from q at the index level.  `perm` maps resample position to
// original unit (triple for bandit data, state-action pair for MDP data);
// log_q_self accumulates the per-step selection probabilities along the
// realized path, with candidate-invariant constants dropped.  The same
// constants are dropped by scheme_log_prob, so the two are comparable.
struct Resample {
  Dataset data;
  Permutation perm;
  double log_q_self = 0.0;
  int restarts = 0;
};

// Draw a resample anchored at `anchor`.  Dead ends restart the whole draw up
// to scheme.max_retries times, then throw TerminatedError.  CondImitationPerm
// requires the exogenous trace recorded when the data was collected; the
// trace is treated as part of the observed record and reused as-is.
// `require_last_action` rejects (and redraws) resamples whose final action
// differs, which conditions a conformal region on X_T.
Resample sample_resample(const Dataset& anchor, const Scheme& scheme,
                         const Policy& policy,
                         const std::vector<ExoDraw>* u_record, Rng& rng,
                         std::optional<ActionId> require_last_action = std::nullopt);

// log q(candidate | anchor-with-this-content), up to the same additive
// constants as Resample::log_q_self; -infinity when the candidate violates
// the scheme's constraints.  All schemes here are content-driven, so the
// probability depends on the conditioning member only through `content`
// (units in original order).
double scheme_log_prob(const Scheme& scheme, const Policy& policy,
                       const Dataset& content, const Permutation& cand_perm,
                       const Dataset& cand_data,
                       const std::vector<ExoDraw>* u_record);

// Convenience: q(content | content) along the identity path.
double scheme_log_prob_identity(const Scheme& scheme, const Policy& policy,
                                const Dataset& content,
                                const std::vector<ExoDraw>* u_record);

// Checks the Eq.-level constraint a resample must satisfy: the (context,
// g-evaluation, response) sequence equals a permuted original with the
// permutation in the hypothesis class implied by (scheme, mdp).
bool resample_satisfies_constraints(const Resample& r, const Dataset& anchor,
                                    const Scheme& scheme);

}  // namespace adaptrt
