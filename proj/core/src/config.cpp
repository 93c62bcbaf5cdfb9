#include "adaptrt/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "adaptrt/errors.hpp"

namespace adaptrt {

namespace {

struct Value {
  int line = 0;
  enum Kind { Str, Num, Bool, Arr } kind = Num;
  std::string s;
  double num = 0.0;
  bool b = false;
  std::vector<Value> arr;
};

using Table = std::map<std::string, std::map<std::string, Value>>;

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

Value parse_scalar(const std::string& tok, int line, const std::string& origin) {
  Value v;
  v.line = line;
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    v.kind = Value::Str;
    v.s = tok.substr(1, tok.size() - 2);
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = Value::Bool;
    v.b = tok == "true";
    return v;
  }
  try {
    std::size_t used = 0;
    v.num = std::stod(tok, &used);
    if (used != tok.size()) fail(origin, line, "bad numeric value '" + tok + "'");
    v.kind = Value::Num;
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(origin, line, "cannot parse value '" + tok + "'");
  }
}

Value parse_value(const std::string& raw, int line, const std::string& origin) {
  const std::string tok = trim(raw);
  if (tok.empty()) fail(origin, line, "missing value");
  if (tok.front() == '[') {
    if (tok.back() != ']') fail(origin, line, "unterminated array");
    Value v;
    v.line = line;
    v.kind = Value::Arr;
    std::string inner = tok.substr(1, tok.size() - 2);
    std::string cur;
    int depth = 0;
    bool in_str = false;
    for (char ch : inner) {
      if (ch == '"') in_str = !in_str;
      if (!in_str && ch == '[') ++depth;
      if (!in_str && ch == ']') --depth;
      if (!in_str && depth == 0 && ch == ',') {
        if (!trim(cur).empty()) v.arr.push_back(parse_scalar(trim(cur), line, origin));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) v.arr.push_back(parse_scalar(trim(cur), line, origin));
    return v;
  }
  return parse_scalar(tok, line, origin);
}

Table parse_toml(std::istream& is, const std::string& origin) {
  Table table;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    // Strip comments outside strings.
    std::string stripped;
    bool in_str = false;
    for (char ch : line) {
      if (ch == '"') in_str = !in_str;
      if (ch == '#' && !in_str) break;
      stripped += ch;
    }
    stripped = trim(stripped);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') fail(origin, line_no, "malformed section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) fail(origin, line_no, "empty section name");
      table[section];
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (section.empty()) fail(origin, line_no, "key outside any [section]");
    if (table[section].count(key))
      fail(origin, line_no, "duplicate key '" + key + "' in [" + section + "]");
    table[section][key] = parse_value(stripped.substr(eq + 1), line_no, origin);
  }
  return table;
}

// Tracks key consumption so leftovers can be reported as unknown keys.
class Reader {
 public:
  Reader(Table table, std::string origin)
      : table_(std::move(table)), origin_(std::move(origin)) {}

  bool has(const std::string& sec, const std::string& key) {
    auto s = table_.find(sec);
    return s != table_.end() && s->second.count(key) > 0;
  }

  const Value* get(const std::string& sec, const std::string& key) {
    auto s = table_.find(sec);
    if (s == table_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used_.insert({sec, key});
    return &k->second;
  }

  std::string str(const std::string& sec, const std::string& key,
                  const std::string& fallback) {
    const Value* v = get(sec, key);
    if (!v) return fallback;
    if (v->kind != Value::Str) fail(origin_, v->line, "expected string for " + key);
    return v->s;
  }

  double num(const std::string& sec, const std::string& key, double fallback) {
    const Value* v = get(sec, key);
    if (!v) return fallback;
    if (v->kind != Value::Num) fail(origin_, v->line, "expected number for " + key);
    return v->num;
  }

  int integer(const std::string& sec, const std::string& key, int fallback) {
    return static_cast<int>(num(sec, key, fallback));
  }

  bool flag(const std::string& sec, const std::string& key, bool fallback) {
    const Value* v = get(sec, key);
    if (!v) return fallback;
    if (v->kind != Value::Bool) fail(origin_, v->line, "expected boolean for " + key);
    return v->b;
  }

  std::vector<double> nums(const std::string& sec, const std::string& key,
                           std::vector<double> fallback) {
    const Value* v = get(sec, key);
    if (!v) return fallback;
    if (v->kind != Value::Arr) fail(origin_, v->line, "expected array for " + key);
    std::vector<double> out;
    for (const auto& e : v->arr) {
      if (e.kind != Value::Num) fail(origin_, e.line, "expected numeric array for " + key);
      out.push_back(e.num);
    }
    return out;
  }

  std::vector<int> ints(const std::string& sec, const std::string& key,
                        std::vector<int> fallback) {
    const Value* v = get(sec, key);
    if (!v) return fallback;
    if (v->kind != Value::Arr) fail(origin_, v->line, "expected array for " + key);
    std::vector<int> out;
    for (const auto& e : v->arr) {
      if (e.kind != Value::Num) fail(origin_, e.line, "expected integer array for " + key);
      out.push_back(static_cast<int>(e.num));
    }
    return out;
  }

  void finish() {
    static const std::set<std::string> known_sections{
        "environment", "policy", "scheme", "statistic",
        "test",        "sweep",  "inversion", "oracle"};
    for (const auto& [sec, keys] : table_) {
      if (!known_sections.count(sec))
        throw ConfigError(origin_ + ": unknown section [" + sec + "]");
      for (const auto& [key, value] : keys) {
        if (!used_.count({sec, key}))
          fail(origin_, value.line,
               "unknown key '" + key + "' in [" + sec + "]");
      }
    }
  }

  const std::string& origin() const { return origin_; }

 private:
  Table table_;
  std::string origin_;
  std::set<std::pair<std::string, std::string>> used_;
};

}  // namespace

int RunConfig::action_count() const {
  if (env) return env->n_actions();
  if (actions > 0) return actions;
  throw ConfigError("config: action space size unknown (set environment.name or "
                    "environment.actions)");
}

GMap RunConfig::build_g() const {
  const int k = action_count();
  if (g_kind == "constant") return GMap::constant(k);
  if (g_kind == "identity") return GMap::identity(k);
  if (g_kind == "indicator") return GMap::indicator(k, g_action);
  if (g_kind == "pair_merge") return GMap::pair_merge(k, g_x, g_x_prime);
  throw ConfigError("config: unknown g kind '" + g_kind + "'");
}

Scheme RunConfig::build_scheme() const {
  return scheme_from_name(scheme_name, scheme_mdp, build_g(), max_retries);
}

EnvClass RunConfig::resolved_env_class(bool nonstationarity_task) const {
  if (env_class) return *env_class;
  if (env) return env_class_for(env->kind, nonstationarity_task);
  throw ConfigError("config: set environment.class or environment.name");
}

Task RunConfig::parsed_task() const {
  if (task == "test") return Task::Test;
  if (task == "ci") return Task::Ci;
  if (task == "conformal") return shared ? Task::ConformalShared : Task::Conformal;
  if (task == "conformal_shared") return Task::ConformalShared;
  throw ConfigError("config: unknown task '" + task + "'");
}

ExperimentConfig RunConfig::experiment() const {
  if (!env) throw ConfigError("config: [environment] name required for simulate");
  ExperimentConfig e;
  e.env = *env;
  e.policies = {policy};
  e.schemes = {scheme_name};
  e.statistic = statistic;
  e.horizons = sweep_horizons;
  e.m_list = sweep_m.empty() ? std::vector<int>{test_m} : sweep_m;
  e.trials = trials;
  e.alpha = alpha;
  e.seed = seed;
  e.under_alternative = alternative;
  e.smoothed = smoothed;
  e.use_mcmc = use_mcmc;
  e.mcmc_steps_per_member = mcmc_steps;
  e.task = parsed_task();
  e.grid_lo = grid_lo;
  e.grid_hi = grid_hi;
  e.grid_step = grid_step;
  if (grid_kind == "location") e.ci_grid_kind = GridKind::Location;
  else if (grid_kind == "scale") e.ci_grid_kind = GridKind::Scale;
  else if (grid_kind == "response") e.ci_grid_kind = GridKind::Response;
  else throw ConfigError("config: unknown inversion grid kind '" + grid_kind + "'");
  e.ci_x = inv_x;
  e.ci_x_prime = inv_x_prime;
  e.ci_true_delta = true_delta;
  e.conditional = conditional;
  e.expansion_radius = expansion_radius;
  e.threads = threads;
  e.max_retries = max_retries;
  return e;
}

RunConfig parse_config(std::istream& is, const std::string& origin) {
  Reader r(parse_toml(is, origin), origin);
  RunConfig c;

  if (r.has("environment", "name")) {
    EnvSpec spec;
    spec.kind = env_kind_from_name(r.str("environment", "name", ""));
    const auto nm = r.nums("environment", "null_means",
                           {spec.null_means[0], spec.null_means[1], spec.null_means[2]});
    const auto am = r.nums("environment", "alt_means",
                           {spec.alt_means[0], spec.alt_means[1], spec.alt_means[2]});
    if (nm.size() != 3 || am.size() != 3)
      throw ConfigError(origin + ": three-arm mean overrides need 3 entries");
    std::copy(nm.begin(), nm.end(), spec.null_means.begin());
    std::copy(am.begin(), am.end(), spec.alt_means.begin());
    c.env = spec;
  } else {
    r.nums("environment", "null_means", {});
    r.nums("environment", "alt_means", {});
  }
  if (r.has("environment", "class"))
    c.env_class = env_class_from_name(r.str("environment", "class", ""));
  c.actions = r.integer("environment", "actions", 0);
  c.states = r.integer("environment", "states", 0);
  c.context_dim = r.integer("environment", "context_dim", 0);

  c.policy.name = r.str("policy", "name", "uniform_iid");
  for (const char* key : {"epsilon", "c", "alpha", "eta", "gamma", "lambda"}) {
    if (r.has("policy", key)) c.policy.params[key] = r.num("policy", key, 0.0);
  }
  c.policy.bias = r.nums("policy", "bias", {});

  c.scheme_name = r.str("scheme", "name", "uniform_pi");
  c.scheme_mdp = r.flag("scheme", "mdp", false);
  c.g_kind = r.str("scheme", "g", "constant");
  c.g_action = r.integer("scheme", "g_action", 0);
  c.g_x = r.integer("scheme", "g_x", 0);
  c.g_x_prime = r.integer("scheme", "g_x_prime", 1);
  c.max_retries = r.integer("scheme", "max_retries", 1000);

  c.statistic.name = r.str("statistic", "name", "abs_residual");
  c.statistic.design = r.str("statistic", "design", "arm_indicators");
  c.statistic.coef_index = r.integer("statistic", "coef_index", 1);
  c.statistic.indicator_arms = r.ints("statistic", "indicator_arms", {0, 2});
  c.statistic.regressor = r.str("statistic", "regressor", "ols");
  c.statistic.lambda = r.num("statistic", "lambda", 1.0);
  c.statistic.lambda_grid =
      r.nums("statistic", "lambda_grid", {0.01, 0.1, 1.0, 10.0, 100.0});
  c.statistic.folds = r.integer("statistic", "folds", 5);

  c.test_m = r.integer("test", "m", 100);
  c.alpha = r.num("test", "alpha", 0.05);
  c.smoothed = r.flag("test", "smoothed", true);
  const std::string kind = r.str("test", "kind", "weighted");
  if (kind == "weighted") c.use_mcmc = false;
  else if (kind == "mcmc") c.use_mcmc = true;
  else throw ConfigError(origin + ": test.kind must be weighted or mcmc");
  c.mcmc_steps = r.integer("test", "mcmc_steps", 1);

  c.sweep_horizons = r.ints("sweep", "T", {10});
  c.sweep_m = r.ints("sweep", "m", {});
  c.trials = r.integer("sweep", "trials", 1000);
  c.seed = static_cast<std::uint64_t>(r.num("sweep", "seed", 0));
  c.alternative = r.flag("sweep", "alternative", false);
  c.task = r.str("sweep", "task", "test");
  c.threads = r.integer("sweep", "threads", 0);

  c.grid_kind = r.str("inversion", "grid", "location");
  c.grid_lo = r.num("inversion", "grid_lo", 0.0);
  c.grid_hi = r.num("inversion", "grid_hi", 0.0);
  c.grid_step = r.num("inversion", "grid_step", 1.0);
  c.inv_x = r.integer("inversion", "x", 0);
  c.inv_x_prime = r.integer("inversion", "x_prime", 1);
  c.true_delta = r.num("inversion", "true_delta", 0.0);
  c.conditional = r.flag("inversion", "conditional", false);
  c.shared = r.flag("inversion", "shared", false);
  c.expansion_radius = r.num("inversion", "expansion_radius", 0.0);

  c.oracle.horizon = r.integer("oracle", "horizon", 3);
  c.oracle.epsilon = r.num("oracle", "epsilon", 0.3);
  const auto theta = r.nums("oracle", "theta", {0.4, 0.7});
  if (theta.size() != 2) throw ConfigError(origin + ": oracle.theta needs 2 entries");
  c.oracle.theta = {theta[0], theta[1]};
  c.oracle.m = r.integer("oracle", "m", 2);
  c.oracle.reps = r.integer("oracle", "reps", 10000);
  c.oracle.alphas = r.nums("oracle", "alphas", {0.01, 0.05, 0.1, 0.2, 0.5});
  c.oracle.scheme = r.str("oracle", "scheme", "imitation_pi");
  c.oracle.test = r.str("oracle", "test", "weighted");
  c.oracle.seed = static_cast<std::uint64_t>(r.num("oracle", "seed", 1));

  r.finish();

  // Cross-field validation: illegal scheme/environment pairs fail here, not
  // at run time.
  if (c.env) {
    const Scheme scheme = c.build_scheme();
    const bool nonstat_task = !scheme.randomizes_actions();
    const EnvClass cls = c.resolved_env_class(nonstat_task);
    if (scheme.randomizes_actions())
      validate_cond_indep_pairing(cls, scheme);
    else
      validate_nonstationarity_pairing(cls, scheme);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  return parse_config(is, path);
}

}  // namespace adaptrt
