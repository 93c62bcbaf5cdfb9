#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adaptrt/errors.hpp"

namespace adaptrt {

using ActionId = int;

// Finite ordered action set {0, ..., k-1}.
struct ActionSpace {
  int k = 1;
  explicit ActionSpace(int k_ = 1) : k(k_) {
    if (k < 1) throw ArgumentError("ActionSpace: need at least one action");
  }
};

// A context is either absent, a categorical state (MDPs), or a dense real
// vector.  All contexts within one dataset share the same kind and dimension.
struct Context {
  enum class Kind { Empty, State, Vector };
  Kind kind = Kind::Empty;
  int state = 0;
  std::vector<double> vec;

  static Context empty() { return Context{}; }
  static Context of_state(int s) {
    Context c;
    c.kind = Kind::State;
    c.state = s;
    return c;
  }
  static Context of_vector(std::vector<double> v) {
    Context c;
    c.kind = Kind::Vector;
    c.vec = std::move(v);
    return c;
  }

  bool operator==(const Context& o) const {
    return kind == o.kind && state == o.state && vec == o.vec;
  }
};

// A response is a real scalar, or the next state for MDP data.
struct Response {
  enum class Kind { Real, State };
  Kind kind = Kind::Real;
  double value = 0.0;
  int state = 0;

  static Response of_real(double v) {
    Response r;
    r.kind = Kind::Real;
    r.value = v;
    return r;
  }
  static Response of_state(int s) {
    Response r;
    r.kind = Kind::State;
    r.state = s;
    return r;
  }

  // Numeric view used by regression-style statistics and reward updates.
  double as_real() const { return kind == Kind::Real ? value : static_cast<double>(state); }

  bool operator==(const Response& o) const {
    return kind == o.kind && value == o.value && state == o.state;
  }
};

struct Triple {
  Context context;
  ActionId action = 0;
  Response response;

  bool operator==(const Triple& o) const {
    return context == o.context && action == o.action && response == o.response;
  }
};

// Ordered (context, action, response) sequence; MDP data additionally carries
// the trailing action X_{T+1} and satisfies the chain invariant
// response_t == context_{t+1} (as states).
class Dataset {
 public:
  // Empty placeholder; real datasets come from the factories below, which
  // enforce T >= 1, kind uniformity, and the MDP chain invariant.
  Dataset() = default;

  static Dataset bandit(std::vector<Triple> triples);
  static Dataset mdp(std::vector<Triple> triples, ActionId trailing_action);

  int length() const { return static_cast<int>(triples_.size()); }
  bool is_mdp() const { return is_mdp_; }
  ActionId trailing_action() const;
  const std::vector<Triple>& triples() const { return triples_; }
  const Triple& at(int t) const { return triples_[static_cast<std::size_t>(t)]; }

  // MDP view: T+1 state-action pairs; pair t is (C_t, X_t) with
  // C_{T+1} = Y_T and X_{T+1} the trailing action.  1-unit count for bandit
  // data is just T.
  int unit_count() const { return is_mdp_ ? length() + 1 : length(); }
  std::pair<int, ActionId> pair_at(int t) const;

  bool operator==(const Dataset& o) const {
    return is_mdp_ == o.is_mdp_ && trailing_ == o.trailing_ && triples_ == o.triples_;
  }

 private:
  std::vector<Triple> triples_;
  std::optional<ActionId> trailing_;
  bool is_mdp_ = false;
};

// Total map action id -> group id; a constant map puts every action in one
// group.  Houses the g of the conditional-independence null.
class GMap {
 public:
  // Constant g over a K-action space.
  static GMap constant(int k);
  // Each action its own group.
  static GMap identity(int k);
  // Two groups: {action} and everything else.
  static GMap indicator(int k, ActionId action);
  // Merge x and x' into one group, all other actions kept separate.
  static GMap pair_merge(int k, ActionId x, ActionId x_prime);

  int group_of(ActionId a) const;
  int actions() const { return static_cast<int>(group_.size()); }
  bool is_constant() const;

  // Actions carrying a given group id, in increasing order.
  const std::vector<ActionId>& group_members(int group) const;

 private:
  void build_members();
  std::vector<int> group_;
  std::vector<std::vector<ActionId>> members_;
};

// Bijection on [0, n); image[t] is the source unit placed at position t.
struct Permutation {
  std::vector<int> image;

  static Permutation identity(int n);
  int size() const { return static_cast<int>(image.size()); }
  bool is_valid() const;
  Permutation inverse() const;
  // (a.then(b))(t) = a(b(t)): apply a first, then b.
  Permutation then(const Permutation& b) const;
};

enum class PermClassKind {
  IdentityOnly,  // non-stationary environments
  All,           // stationary non-reactive
  MdpChain,      // chain-preserving permutations of state-action pairs
  GRestricted,   // fixes the sequence of g-evaluations
};

// apply_permutation: reorder a dataset.  Bandit data permutes triples; MDP
// data permutes the T+1 state-action pairs and re-derives the response chain.
Dataset apply_permutation(const Dataset& d, const Permutation& pi);

// Class membership for a candidate permutation against reference data.
bool perm_class_contains(PermClassKind cls, const Permutation& pi,
                         const Dataset& d, const GMap& g);

// MDP successor map phi(c, x) = { t in [2 : T+1] : (C_{t-1}, X_{t-1}) = (c, x) },
// with 1-based indices as in the chain-restricted samplers.
using SuccessorMap = std::map<std::pair<int, ActionId>, std::vector<int>>;
SuccessorMap successor_map(const Dataset& d);

}  // namespace adaptrt
