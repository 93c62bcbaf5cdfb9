#include "adaptrt/policy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "adaptrt/errors.hpp"
#include "adaptrt/stats.hpp"

namespace adaptrt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<ActionId>> all_orders(int k) {
  if (k > 6)
    throw UnsupportedPolicyError(
        "exogenous decomposition enumerates K! tie-break orders; K > 6 unsupported");
  std::vector<ActionId> base(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) base[static_cast<std::size_t>(a)] = a;
  std::vector<std::vector<ActionId>> out;
  do {
    out.push_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

}  // namespace

void argmax_probs(const std::vector<double>& scores, std::vector<double>& out) {
  out.assign(scores.size(), 0.0);
  double best = -kInf;
  for (double s : scores) best = std::max(best, s);
  int ties = 0;
  for (double s : scores)
    if (s == best) ++ties;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] == best) out[i] = 1.0 / ties;
}

double Policy::action_prob(const Context& c, ActionId a) const {
  std::vector<double> p;
  action_probs(c, p);
  if (a < 0 || a >= num_actions()) throw ArgumentError("action_prob: bad action id");
  return p[static_cast<std::size_t>(a)];
}

ExoDraw Policy::sample_u(Rng& rng) const {
  const USupport sup = u_support();
  double u = rng.uniform();
  for (const auto& atom : sup) {
    u -= atom.prob;
    if (u < 0.0) return atom.value;
  }
  return sup.back().value;
}

ActionId Policy::sample_action(const Context& c, Rng& rng, ExoDraw* u_out) const {
  ExoDraw u = sample_u(rng);
  const ActionId a = decide(c, u);
  if (u_out) *u_out = std::move(u);
  return a;
}

namespace {

// ---------------------------------------------------------------------------
// i.i.d. policies: U_t is the action itself.

class IidPolicy final : public Policy {
 public:
  IidPolicy(std::vector<double> probs, std::string name)
      : probs_(std::move(probs)), name_(std::move(name)) {
    double total = 0.0;
    for (double p : probs_) {
      if (p < 0.0) throw ArgumentError(name_ + ": negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ArgumentError(name_ + ": probabilities must sum to 1");
  }

  std::unique_ptr<Policy> clone() const override { return std::make_unique<IidPolicy>(*this); }
  std::string name() const override { return name_; }
  int num_actions() const override { return static_cast<int>(probs_.size()); }
  void reset() override {}
  void observe(const Triple&) override {}
  void action_probs(const Context&, std::vector<double>& out) const override { out = probs_; }
  bool is_randomized() const override { return true; }

  USupport u_support() const override {
    USupport sup;
    for (int a = 0; a < num_actions(); ++a) {
      if (probs_[static_cast<std::size_t>(a)] == 0.0) continue;
      ExoAtom atom;
      atom.value.direct = a;
      atom.prob = probs_[static_cast<std::size_t>(a)];
      sup.push_back(std::move(atom));
    }
    return sup;
  }

  ActionId decide(const Context&, const ExoDraw& u) const override {
    if (u.direct < 0 || u.direct >= num_actions())
      throw ArgumentError(name_ + ": malformed exogenous draw");
    return u.direct;
  }

 private:
  std::vector<double> probs_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Score-driven policies.  Deterministic ones pick uniformly over the argmax
// set; the epsilon-greedy family explores with probability epsilon.  U_t is
// (explore flag, uniform tie-break order); the explore pick is order[0].

class ScorePolicy : public Policy {
 public:
  ScorePolicy(int k, double epsilon) : k_(k), epsilon_(epsilon) {
    if (k < 1) throw ArgumentError("policy: need at least one action");
    if (epsilon < 0.0 || epsilon > 1.0) throw ArgumentError("policy: epsilon in [0,1]");
  }

  int num_actions() const override { return k_; }
  bool is_randomized() const override { return epsilon_ > 0.0; }

  virtual void scores(const Context& c, std::vector<double>& out) const = 0;

  void action_probs(const Context& c, std::vector<double>& out) const override {
    std::vector<double> s;
    scores(c, s);
    argmax_probs(s, out);
    if (epsilon_ > 0.0) {
      for (double& p : out) p = (1.0 - epsilon_) * p + epsilon_ / k_;
    }
  }

  USupport u_support() const override {
    const auto orders = all_orders(k_);
    USupport sup;
    const double per_order = 1.0 / static_cast<double>(orders.size());
    if (epsilon_ > 0.0) {
      for (const auto& order : orders) {
        ExoAtom explore;
        explore.value.explore = true;
        explore.value.order = order;
        explore.prob = epsilon_ * per_order;
        sup.push_back(std::move(explore));
      }
    }
    for (const auto& order : orders) {
      ExoAtom exploit;
      exploit.value.explore = false;
      exploit.value.order = order;
      exploit.prob = (1.0 - epsilon_) * per_order;
      sup.push_back(std::move(exploit));
    }
    return sup;
  }

  ActionId decide(const Context& c, const ExoDraw& u) const override {
    if (static_cast<int>(u.order.size()) != k_)
      throw ArgumentError(name() + ": malformed exogenous draw");
    if (u.explore) return u.order.front();
    std::vector<double> s;
    scores(c, s);
    double best = -kInf;
    for (double v : s) best = std::max(best, v);
    for (ActionId a : u.order)
      if (s[static_cast<std::size_t>(a)] == best) return a;
    return u.order.front();
  }

 protected:
  int k_;
  double epsilon_;
};

// Contextless empirical-mean tracker shared by eps-greedy and UCB.

class ArmStats {
 public:
  explicit ArmStats(int k) : count_(static_cast<std::size_t>(k), 0),
                             sum_(static_cast<std::size_t>(k), 0.0) {}
  void reset() {
    std::fill(count_.begin(), count_.end(), 0);
    std::fill(sum_.begin(), sum_.end(), 0.0);
  }
  void add(ActionId a, double y) {
    count_[static_cast<std::size_t>(a)] += 1;
    sum_[static_cast<std::size_t>(a)] += y;
  }
  long count(ActionId a) const { return count_[static_cast<std::size_t>(a)]; }
  long total() const {
    long t = 0;
    for (long c : count_) t += c;
    return t;
  }
  // Unpulled arms default to mean 0.
  double mean(ActionId a) const {
    const long n = count_[static_cast<std::size_t>(a)];
    return n == 0 ? 0.0 : sum_[static_cast<std::size_t>(a)] / static_cast<double>(n);
  }

 private:
  std::vector<long> count_;
  std::vector<double> sum_;
};

class EpsGreedyPolicy final : public ScorePolicy {
 public:
  EpsGreedyPolicy(int k, double epsilon) : ScorePolicy(k, epsilon), stats_(k) {}
  std::unique_ptr<Policy> clone() const override { return std::make_unique<EpsGreedyPolicy>(*this); }
  std::string name() const override { return "eps_greedy"; }
  void reset() override { stats_.reset(); }
  void observe(const Triple& z) override { stats_.add(z.action, z.response.as_real()); }
  void scores(const Context&, std::vector<double>& out) const override {
    out.resize(static_cast<std::size_t>(k_));
    for (int a = 0; a < k_; ++a) out[static_cast<std::size_t>(a)] = stats_.mean(a);
  }

 private:
  ArmStats stats_;
};

class UcbPolicy final : public ScorePolicy {
 public:
  UcbPolicy(int k, double c) : ScorePolicy(k, 0.0), c_(c), stats_(k) {}
  std::unique_ptr<Policy> clone() const override { return std::make_unique<UcbPolicy>(*this); }
  std::string name() const override { return "ucb"; }
  void reset() override { stats_.reset(); }
  void observe(const Triple& z) override { stats_.add(z.action, z.response.as_real()); }
  void scores(const Context&, std::vector<double>& out) const override {
    out.resize(static_cast<std::size_t>(k_));
    const double t = static_cast<double>(stats_.total() + 1);
    for (int a = 0; a < k_; ++a) {
      const long n = stats_.count(a);
      out[static_cast<std::size_t>(a)] =
          n == 0 ? kInf
                 : stats_.mean(a) + c_ * std::sqrt(2.0 * std::log(t) / static_cast<double>(n));
    }
  }

 private:
  double c_;
  ArmStats stats_;
};

// Per-arm lasso regressors on vector contexts; unfit arms predict 0.

class EpsGreedyLinearPolicy final : public ScorePolicy {
 public:
  EpsGreedyLinearPolicy(int k, int dim, double epsilon, double lambda)
      : ScorePolicy(k, epsilon), dim_(dim), lambda_(lambda),
        rows_(static_cast<std::size_t>(k)), targets_(static_cast<std::size_t>(k)),
        beta_(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(dim)) {}

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<EpsGreedyLinearPolicy>(*this);
  }
  std::string name() const override { return "eps_greedy_linear"; }

  void reset() override {
    for (auto& r : rows_) r.clear();
    for (auto& t : targets_) t.clear();
    for (auto& b : beta_) b.setZero();
  }

  void observe(const Triple& z) override {
    if (z.context.kind != Context::Kind::Vector ||
        static_cast<int>(z.context.vec.size()) != dim_)
      throw ArgumentError("eps_greedy_linear: expected vector context of fixed dim");
    auto& rows = rows_[static_cast<std::size_t>(z.action)];
    auto& ys = targets_[static_cast<std::size_t>(z.action)];
    rows.push_back(z.context.vec);
    ys.push_back(z.response.as_real());
    refit(z.action);
  }

  void scores(const Context& c, std::vector<double>& out) const override {
    if (c.kind != Context::Kind::Vector || static_cast<int>(c.vec.size()) != dim_)
      throw ArgumentError("eps_greedy_linear: expected vector context of fixed dim");
    out.resize(static_cast<std::size_t>(k_));
    Eigen::Map<const Eigen::VectorXd> cv(c.vec.data(), dim_);
    for (int a = 0; a < k_; ++a)
      out[static_cast<std::size_t>(a)] = beta_[static_cast<std::size_t>(a)].dot(cv);
  }

 private:
  void refit(ActionId a) {
    const auto& rows = rows_[static_cast<std::size_t>(a)];
    const auto& ys = targets_[static_cast<std::size_t>(a)];
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd x(n, dim_);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      x.row(i) = Eigen::Map<const Eigen::VectorXd>(rows[static_cast<std::size_t>(i)].data(), dim_);
      y(i) = ys[static_cast<std::size_t>(i)];
    }
    std::vector<bool> penalized(static_cast<std::size_t>(dim_), true);
    lasso_cd(x, y, lambda_, penalized, beta_[static_cast<std::size_t>(a)]);
  }

  int dim_;
  double lambda_;
  std::vector<std::vector<std::vector<double>>> rows_;
  std::vector<std::vector<double>> targets_;
  std::vector<Eigen::VectorXd> beta_;
};

// Per-arm ridge with unit regularization and a sqrt(c' A^-1 c) bonus.  The
// bonus quadratic forms are cached per context value and rolled forward
// through the Sherman-Morrison rank-1 terms, so repeated evaluation of the
// same candidate set costs O(d) per query instead of O(d^2).

class LinUcbPolicy final : public ScorePolicy {
 public:
  LinUcbPolicy(int k, int dim, double alpha)
      : ScorePolicy(k, 0.0), dim_(dim), alpha_(alpha) {
    reset();
  }

  std::unique_ptr<Policy> clone() const override { return std::make_unique<LinUcbPolicy>(*this); }
  std::string name() const override { return "linucb"; }

  void reset() override {
    b_.assign(static_cast<std::size_t>(k_), Eigen::VectorXd::Zero(dim_));
    theta_.assign(static_cast<std::size_t>(k_), Eigen::VectorXd::Zero(dim_));
    deltas_.assign(static_cast<std::size_t>(k_), {});
    ++epoch_;
  }

  // A^-1 is kept implicitly through its Sherman-Morrison history:
  // A^-1 x = x - sum_k v_k (v_k' x) / denom_k, so one observe costs
  // O(n_arm * d) rather than O(d^2).
  Eigen::VectorXd apply_a_inv(std::size_t arm, const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = x;
    for (const auto& [v, inv_denom] : deltas_[arm]) out -= v * (v.dot(x) * inv_denom);
    return out;
  }

  void observe(const Triple& z) override {
    if (z.context.kind != Context::Kind::Vector ||
        static_cast<int>(z.context.vec.size()) != dim_)
      throw ArgumentError("linucb: expected vector context of fixed dim");
    const std::size_t a = static_cast<std::size_t>(z.action);
    Eigen::Map<const Eigen::VectorXd> c(z.context.vec.data(), dim_);
    const Eigen::VectorXd v = apply_a_inv(a, c);
    const double denom = 1.0 + c.dot(v);
    b_[a].noalias() += c * z.response.as_real();
    deltas_[a].push_back({v, 1.0 / denom});
    theta_[a] = apply_a_inv(a, b_[a]);
  }

  void scores(const Context& c, std::vector<double>& out) const override {
    if (c.kind != Context::Kind::Vector || static_cast<int>(c.vec.size()) != dim_)
      throw ArgumentError("linucb: expected vector context of fixed dim");
    out.resize(static_cast<std::size_t>(k_));
    Eigen::Map<const Eigen::VectorXd> cv(c.vec.data(), dim_);
    CacheEntry& entry = lookup(c.vec);
    for (int a = 0; a < k_; ++a) {
      const std::size_t ai = static_cast<std::size_t>(a);
      const auto& history = deltas_[ai];
      // quad(c) under A = I is |c|^2; each observe subtracts (c'v)^2 / denom.
      if (entry.epoch != epoch_) {
        std::fill(entry.quad.begin(), entry.quad.end(), entry.base_sq);
        std::fill(entry.version.begin(), entry.version.end(), std::size_t{0});
        entry.epoch = epoch_;
      }
      while (entry.version[ai] < history.size()) {
        const auto& [v, inv_denom] = history[entry.version[ai]];
        const double cv_dot = cv.dot(v);
        entry.quad[ai] -= cv_dot * cv_dot * inv_denom;
        entry.version[ai] += 1;
      }
      out[ai] = theta_[ai].dot(cv) +
                alpha_ * std::sqrt(std::max(0.0, entry.quad[ai]));
    }
  }

 private:
  struct CacheEntry {
    std::vector<double> ctx;
    double base_sq = 0.0;
    std::uint64_t epoch = 0;
    std::vector<double> quad;
    std::vector<std::size_t> version;
  };

  CacheEntry& lookup(const std::vector<double>& ctx) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (double v : ctx) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      h ^= bits + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    auto range = cache_.equal_range(h);
    for (auto it = range.first; it != range.second; ++it)
      if (it->second.ctx == ctx) return it->second;
    if (cache_.size() > 65536) cache_.clear();
    auto it = cache_.emplace(h, CacheEntry{});
    CacheEntry& entry = it->second;
    entry.ctx = ctx;
    for (double v : ctx) entry.base_sq += v * v;
    entry.epoch = epoch_;
    entry.quad.assign(static_cast<std::size_t>(k_), entry.base_sq);
    entry.version.assign(static_cast<std::size_t>(k_), 0);
    return entry;
  }

  int dim_;
  double alpha_;
  std::vector<Eigen::VectorXd> b_;
  std::vector<Eigen::VectorXd> theta_;
  std::vector<std::vector<std::pair<Eigen::VectorXd, double>>> deltas_;
  std::uint64_t epoch_ = 0;
  mutable std::unordered_multimap<std::uint64_t, CacheEntry> cache_;
};

// Tabular Q-learning on state contexts.  MDP data carries the next state as
// the response; its integer value doubles as the reward signal.

class QLearnPolicy final : public ScorePolicy {
 public:
  QLearnPolicy(int k, int n_states, double epsilon, double eta, double gamma)
      : ScorePolicy(k, epsilon), eta_(eta), gamma_(gamma),
        q_(static_cast<std::size_t>(n_states),
           std::vector<double>(static_cast<std::size_t>(k), 0.0)) {}

  std::unique_ptr<Policy> clone() const override { return std::make_unique<QLearnPolicy>(*this); }
  std::string name() const override { return epsilon_ > 0.0 ? "q_eps_greedy" : "q_greedy"; }

  void reset() override {
    for (auto& row : q_) std::fill(row.begin(), row.end(), 0.0);
  }

  void observe(const Triple& z) override {
    if (z.context.kind != Context::Kind::State ||
        z.response.kind != Response::Kind::State)
      throw ArgumentError("q_learning: expects state contexts and state responses");
    ensure_state(std::max(z.context.state, z.response.state));
    const std::size_t s = static_cast<std::size_t>(z.context.state);
    const std::size_t a = static_cast<std::size_t>(z.action);
    const std::size_t s2 = static_cast<std::size_t>(z.response.state);
    const double reward = static_cast<double>(z.response.state);
    const double best_next = *std::max_element(q_[s2].begin(), q_[s2].end());
    q_[s][a] += eta_ * (reward + gamma_ * best_next - q_[s][a]);
  }

  void scores(const Context& c, std::vector<double>& out) const override {
    if (c.kind != Context::Kind::State)
      throw ArgumentError("q_learning: expects state contexts");
    out.assign(static_cast<std::size_t>(k_), 0.0);
    const std::size_t s = static_cast<std::size_t>(c.state);
    if (s < q_.size()) out = q_[s];
  }

 private:
  void ensure_state(int s) {
    if (s >= static_cast<int>(q_.size()))
      q_.resize(static_cast<std::size_t>(s) + 1,
                std::vector<double>(static_cast<std::size_t>(k_), 0.0));
  }

  double eta_;
  double gamma_;
  std::vector<std::vector<double>> q_;
};

}  // namespace

PolicyPtr make_uniform_iid(int k) {
  return std::make_unique<IidPolicy>(
      std::vector<double>(static_cast<std::size_t>(k), 1.0 / k), "uniform_iid");
}

PolicyPtr make_biased_iid(std::vector<double> probs) {
  return std::make_unique<IidPolicy>(std::move(probs), "biased_iid");
}

PolicyPtr make_eps_greedy(int k, double epsilon) {
  return std::make_unique<EpsGreedyPolicy>(k, epsilon);
}

PolicyPtr make_ucb(int k, double c) { return std::make_unique<UcbPolicy>(k, c); }

PolicyPtr make_eps_greedy_linear(int k, int dim, double epsilon, double lambda) {
  return std::make_unique<EpsGreedyLinearPolicy>(k, dim, epsilon, lambda);
}

PolicyPtr make_linucb(int k, int dim, double alpha) {
  return std::make_unique<LinUcbPolicy>(k, dim, alpha);
}

PolicyPtr make_q_greedy(int k, int n_states, double eta, double gamma) {
  return std::make_unique<QLearnPolicy>(k, n_states, 0.0, eta, gamma);
}

PolicyPtr make_q_eps_greedy(int k, int n_states, double epsilon, double eta, double gamma) {
  return std::make_unique<QLearnPolicy>(k, n_states, epsilon, eta, gamma);
}

namespace {

class UnshiftPolicy final : public Policy {
 public:
  UnshiftPolicy(PolicyPtr base, double delta, ActionId x, bool scale)
      : base_(std::move(base)), delta_(delta), x_(x), scale_(scale) {}

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<UnshiftPolicy>(base_->clone(), delta_, x_, scale_);
  }
  std::string name() const override { return base_->name() + "+unshift"; }
  int num_actions() const override { return base_->num_actions(); }
  void reset() override { base_->reset(); }

  void observe(const Triple& z) override {
    Triple raw = z;
    if (raw.action == x_ && raw.response.kind == Response::Kind::Real) {
      if (scale_)
        raw.response.value /= delta_;
      else
        raw.response.value -= delta_;
    }
    base_->observe(raw);
  }

  void action_probs(const Context& c, std::vector<double>& out) const override {
    base_->action_probs(c, out);
  }
  bool is_randomized() const override { return base_->is_randomized(); }
  USupport u_support() const override { return base_->u_support(); }
  ActionId decide(const Context& c, const ExoDraw& u) const override {
    return base_->decide(c, u);
  }

 private:
  PolicyPtr base_;
  double delta_;
  ActionId x_;
  bool scale_;
};

}  // namespace

PolicyPtr make_unshift_policy(const Policy& base, double delta, ActionId x,
                              bool scale_family) {
  return std::make_unique<UnshiftPolicy>(base.clone(), delta, x, scale_family);
}

void replay(Policy& p, const Dataset& d, int prefix_len) {
  if (prefix_len < 0 || prefix_len > d.length())
    throw ArgumentError("replay: prefix out of range");
  p.reset();
  for (int t = 0; t < prefix_len; ++t) p.observe(d.at(t));
}

}  // namespace adaptrt
