#include "adaptrt/data.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace adaptrt {

namespace {

void check_uniform_kinds(const std::vector<Triple>& triples) {
  if (triples.empty()) throw ArgumentError("Dataset: length must be >= 1");
  const auto ckind = triples.front().context.kind;
  const auto rkind = triples.front().response.kind;
  const std::size_t dim = triples.front().context.vec.size();
  for (const auto& z : triples) {
    if (z.context.kind != ckind)
      throw ArgumentError("Dataset: mixed context kinds");
    if (z.context.kind == Context::Kind::Vector && z.context.vec.size() != dim)
      throw ArgumentError("Dataset: mixed context dimensions");
    if (z.response.kind != rkind)
      throw ArgumentError("Dataset: mixed response kinds");
  }
}

}  // namespace

Dataset Dataset::bandit(std::vector<Triple> triples) {
  check_uniform_kinds(triples);
  Dataset d;
  d.triples_ = std::move(triples);
  d.is_mdp_ = false;
  return d;
}

Dataset Dataset::mdp(std::vector<Triple> triples, ActionId trailing_action) {
  check_uniform_kinds(triples);
  for (std::size_t t = 0; t < triples.size(); ++t) {
    if (triples[t].context.kind != Context::Kind::State ||
        triples[t].response.kind != Response::Kind::State)
      throw ArgumentError("Dataset: MDP data needs state contexts and responses");
    if (t + 1 < triples.size() &&
        triples[t].response.state != triples[t + 1].context.state)
      throw ArgumentError("Dataset: MDP chain broken (Y_t != C_{t+1})");
  }
  Dataset d;
  d.triples_ = std::move(triples);
  d.trailing_ = trailing_action;
  d.is_mdp_ = true;
  return d;
}

ActionId Dataset::trailing_action() const {
  if (!trailing_) throw ArgumentError("Dataset: no trailing action (not MDP data)");
  return *trailing_;
}

std::pair<int, ActionId> Dataset::pair_at(int t) const {
  if (!is_mdp_) throw ArgumentError("Dataset: pair view requires MDP data");
  if (t < 0 || t > length()) throw ArgumentError("Dataset: pair index out of range");
  if (t == length()) return {triples_.back().response.state, trailing_action()};
  return {triples_[static_cast<std::size_t>(t)].context.state,
          triples_[static_cast<std::size_t>(t)].action};
}

GMap GMap::constant(int k) {
  GMap g;
  g.group_.assign(static_cast<std::size_t>(k), 0);
  g.build_members();
  return g;
}

GMap GMap::identity(int k) {
  GMap g;
  g.group_.resize(static_cast<std::size_t>(k));
  std::iota(g.group_.begin(), g.group_.end(), 0);
  g.build_members();
  return g;
}

GMap GMap::indicator(int k, ActionId action) {
  GMap g;
  g.group_.assign(static_cast<std::size_t>(k), 0);
  g.group_.at(static_cast<std::size_t>(action)) = 1;
  g.build_members();
  return g;
}

GMap GMap::pair_merge(int k, ActionId x, ActionId x_prime) {
  GMap g;
  g.group_.resize(static_cast<std::size_t>(k));
  std::iota(g.group_.begin(), g.group_.end(), 0);
  g.group_.at(static_cast<std::size_t>(x_prime)) =
      g.group_.at(static_cast<std::size_t>(x));
  g.build_members();
  return g;
}

void GMap::build_members() {
  int max_group = 0;
  for (int v : group_) max_group = std::max(max_group, v);
  members_.assign(static_cast<std::size_t>(max_group) + 1, {});
  for (int a = 0; a < actions(); ++a)
    members_[static_cast<std::size_t>(group_[static_cast<std::size_t>(a)])]
        .push_back(a);
}

int GMap::group_of(ActionId a) const {
  if (a < 0 || a >= actions()) throw ArgumentError("GMap: action out of range");
  return group_[static_cast<std::size_t>(a)];
}

bool GMap::is_constant() const {
  for (int v : group_)
    if (v != group_.front()) return false;
  return true;
}

const std::vector<ActionId>& GMap::group_members(int group) const {
  if (group < 0 || group >= static_cast<int>(members_.size()))
    throw ArgumentError("GMap: unknown group id");
  return members_[static_cast<std::size_t>(group)];
}

Permutation Permutation::identity(int n) {
  Permutation p;
  p.image.resize(static_cast<std::size_t>(n));
  std::iota(p.image.begin(), p.image.end(), 0);
  return p;
}

bool Permutation::is_valid() const {
  std::vector<char> seen(image.size(), 0);
  for (int v : image) {
    if (v < 0 || v >= size() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

Permutation Permutation::inverse() const {
  Permutation p;
  p.image.resize(image.size());
  for (int t = 0; t < size(); ++t)
    p.image[static_cast<std::size_t>(image[static_cast<std::size_t>(t)])] = t;
  return p;
}

Permutation Permutation::then(const Permutation& b) const {
  if (size() != b.size()) throw ArgumentError("Permutation: size mismatch");
  Permutation p;
  p.image.resize(image.size());
  for (int t = 0; t < size(); ++t)
    p.image[static_cast<std::size_t>(t)] =
        image[static_cast<std::size_t>(b.image[static_cast<std::size_t>(t)])];
  return p;
}

Dataset apply_permutation(const Dataset& d, const Permutation& pi) {
  if (pi.size() != d.unit_count())
    throw ArgumentError("apply_permutation: permutation length mismatch");
  if (!pi.is_valid()) throw ArgumentError("apply_permutation: not a bijection");

  if (!d.is_mdp()) {
    std::vector<Triple> out;
    out.reserve(d.triples().size());
    for (int t = 0; t < d.length(); ++t)
      out.push_back(d.at(pi.image[static_cast<std::size_t>(t)]));
    return Dataset::bandit(std::move(out));
  }

  // MDP: reorder the T+1 state-action pairs, then re-derive the responses as
  // each pair's successor state.
  const int n = d.unit_count();
  std::vector<Triple> out;
  out.reserve(static_cast<std::size_t>(n - 1));
  for (int t = 0; t + 1 < n; ++t) {
    const auto cur = d.pair_at(pi.image[static_cast<std::size_t>(t)]);
    const auto nxt = d.pair_at(pi.image[static_cast<std::size_t>(t + 1)]);
    Triple z;
    z.context = Context::of_state(cur.first);
    z.action = cur.second;
    z.response = Response::of_state(nxt.first);
    out.push_back(std::move(z));
  }
  const auto last = d.pair_at(pi.image[static_cast<std::size_t>(n - 1)]);
  return Dataset::mdp(std::move(out), last.second);
}

namespace {

// Multiset equality between the chain triples induced by a pair permutation
// and the original triples.  Together with C_{pi(1)} = C_1 this is exactly
// membership in the chain-preserving class.
bool mdp_chain_ok(const Permutation& pi, const Dataset& d) {
  const int n = d.unit_count();
  if (d.pair_at(pi.image[0]).first != d.pair_at(0).first) return false;
  std::map<std::tuple<int, ActionId, int>, int> counts;
  for (int t = 0; t + 1 < n; ++t) {
    const auto cur = d.pair_at(t);
    const auto nxt = d.pair_at(t + 1);
    counts[{cur.first, cur.second, nxt.first}] += 1;
  }
  for (int t = 0; t + 1 < n; ++t) {
    const auto cur = d.pair_at(pi.image[static_cast<std::size_t>(t)]);
    const auto nxt = d.pair_at(pi.image[static_cast<std::size_t>(t + 1)]);
    auto it = counts.find({cur.first, cur.second, nxt.first});
    if (it == counts.end() || it->second == 0) return false;
    it->second -= 1;
  }
  return true;
}

}  // namespace

bool perm_class_contains(PermClassKind cls, const Permutation& pi,
                         const Dataset& d, const GMap& g) {
  if (pi.size() != d.unit_count() || !pi.is_valid())
    throw ArgumentError("perm_class_contains: invalid permutation for dataset");
  switch (cls) {
    case PermClassKind::IdentityOnly: {
      for (int t = 0; t < pi.size(); ++t)
        if (pi.image[static_cast<std::size_t>(t)] != t) return false;
      return true;
    }
    case PermClassKind::All:
      return true;
    case PermClassKind::MdpChain: {
      if (!d.is_mdp())
        throw ArgumentError("perm_class_contains: MdpChain needs MDP data");
      return mdp_chain_ok(pi, d);
    }
    case PermClassKind::GRestricted: {
      for (int t = 0; t < pi.size(); ++t) {
        const ActionId src = d.is_mdp()
                                 ? d.pair_at(pi.image[static_cast<std::size_t>(t)]).second
                                 : d.at(pi.image[static_cast<std::size_t>(t)]).action;
        const ActionId ref = d.is_mdp() ? d.pair_at(t).second : d.at(t).action;
        if (g.group_of(src) != g.group_of(ref)) return false;
      }
      return true;
    }
  }
  throw ArgumentError("perm_class_contains: unknown class");
}

SuccessorMap successor_map(const Dataset& d) {
  if (!d.is_mdp()) throw ArgumentError("successor_map: needs MDP data");
  SuccessorMap phi;
  const int n = d.unit_count();
  for (int t = 1; t < n; ++t) {
    const auto prev = d.pair_at(t - 1);
    phi[prev].push_back(t + 1);  // 1-based successor indices
  }
  return phi;
}

}  // namespace adaptrt
