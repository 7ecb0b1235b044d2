#include "qstab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qstab/errors.hpp"

namespace qstab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true|false, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

const std::set<std::string> kEnvKeys = {
    "env",     "env_kind", "arrival_rates", "service_probs", "connect_probs",
    "init_max", "lambda1", "lambda2",       "mu1",           "mu2",
    "mu3",     "holding_costs"};

void apply_method_defaults(MethodConfig& m) {
  if (m.method == "stop") {
    m.shaping.enabled = true;
    m.transform = TransformKind::symloge;
  } else {
    m.shaping.enabled = false;
    m.transform = TransformKind::identity;
  }
}

void apply_one(ExperimentConfig& cfg, const std::string& key,
               const std::string& v) {
  MethodConfig& m = cfg.method;
  if (key == "method") {
    // handled up front by config_from_map; accept silently for overrides
    static const std::set<std::string> methods = {"ppo",    "stop",  "maxweight",
                                                  "cmu",    "random", "ppo_tw"};
    if (!methods.count(v)) throw ConfigError("unknown method: " + v);
    m.method = v;
  } else if (key == "shaping_enabled") {
    m.shaping.enabled = parse_bool(key, v);
  } else if (key == "lyapunov_p") {
    m.shaping.lyapunov_p = parse_double(key, v);
    if (!(m.shaping.lyapunov_p > 0.0))
      throw ConfigError("lyapunov_p must be positive");
  } else if (key == "cost_variant") {
    m.shaping.variant = cost_variant_from_label(v);
  } else if (key == "state_transform") {
    m.transform = transform_from_label(v);
  } else if (key == "rollout_len") {
    m.ppo.rollout_len = static_cast<int>(parse_long(key, v));
    if (m.ppo.rollout_len < 1) throw ConfigError("rollout_len must be >= 1");
  } else if (key == "lr") {
    m.ppo.lr = parse_double(key, v);
  } else if (key == "clip") {
    m.ppo.clip = parse_double(key, v);
    if (!(m.ppo.clip > 0.0 && m.ppo.clip < 1.0))
      throw ConfigError("clip must be in (0,1)");
  } else if (key == "gae_lambda") {
    m.ppo.gae_lambda = parse_double(key, v);
    if (!(m.ppo.gae_lambda >= 0.0 && m.ppo.gae_lambda <= 1.0))
      throw ConfigError("gae_lambda must be in [0,1]");
  } else if (key == "epochs") {
    m.ppo.epochs = static_cast<int>(parse_long(key, v));
  } else if (key == "minibatches") {
    m.ppo.minibatches = static_cast<int>(parse_long(key, v));
    if (m.ppo.minibatches < 1) throw ConfigError("minibatches must be >= 1");
  } else if (key == "entropy_coef") {
    m.ppo.entropy_coef = parse_double(key, v);
  } else if (key == "vf_coef") {
    m.ppo.vf_coef = parse_double(key, v);
  } else if (key == "max_grad_norm") {
    m.ppo.max_grad_norm = parse_double(key, v);
  } else if (key == "adam_beta1") {
    m.ppo.adam_beta1 = parse_double(key, v);
  } else if (key == "adam_beta2") {
    m.ppo.adam_beta2 = parse_double(key, v);
  } else if (key == "eta_mode") {
    if (v == "buffer_mean")
      m.ppo.eta_mode = PpoHyper::EtaMode::buffer_mean;
    else if (v == "ema")
      m.ppo.eta_mode = PpoHyper::EtaMode::ema;
    else
      throw ConfigError("eta_mode: expected buffer_mean|ema");
  } else if (key == "eta_ema_alpha") {
    m.ppo.eta_ema_alpha = parse_double(key, v);
  } else if (key == "tw_upper") {
    m.tw.upper = static_cast<int>(parse_long(key, v));
  } else if (key == "tw_lower") {
    m.tw.lower = static_cast<int>(parse_long(key, v));
  } else if (key == "steps") {
    cfg.steps = parse_long(key, v);
  } else if (key == "trials") {
    cfg.trials = static_cast<int>(parse_long(key, v));
  } else if (key == "seed") {
    cfg.base_seed = static_cast<std::uint64_t>(parse_long(key, v));
  } else if (key == "out") {
    cfg.out_dir = v;
  } else if (key == "window") {
    cfg.window = parse_long(key, v);
  } else if (key == "raw") {
    cfg.raw = parse_bool(key, v);
  } else if (key == "workers") {
    cfg.workers = static_cast<int>(parse_long(key, v));
  } else if (key == "visit_grid") {
    cfg.visit_grid = parse_bool(key, v);
  } else if (key == "visit_grid_max") {
    cfg.visit_grid_max = static_cast<int>(parse_long(key, v));
  } else if (key == "checkpoint_out") {
    cfg.checkpoint_out = v;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

EnvConfig env_from_map(const std::map<std::string, std::string>& kv,
                       std::string& label) {
  const auto it = kv.find("env");
  label = it == kv.end() ? "sa-medium" : it->second;

  if (label != "custom") {
    for (const auto& [k, v] : kv)
      if (k != "env" && k != "init_max" && kEnvKeys.count(k))
        throw ConfigError("env key '" + k + "' conflicts with preset '" +
                          label + "' (use env = custom)");
    EnvConfig env = load_preset(label);
    if (const auto im = kv.find("init_max"); im != kv.end()) {
      const int init_max = static_cast<int>(parse_long("init_max", im->second));
      std::visit([init_max](auto& c) { c.init_max = init_max; }, env);
    }
    return env;
  }

  const auto kind = kv.find("env_kind");
  if (kind == kv.end())
    throw ConfigError("env = custom requires env_kind = server-alloc|nmodel");
  if (kind->second == "server-alloc") {
    ServerAllocConfig c;
    for (const char* req : {"arrival_rates", "service_probs", "connect_probs"})
      if (!kv.count(req))
        throw ConfigError(std::string("custom server-alloc env requires ") + req);
    c.arrival_rates = parse_double_list("arrival_rates", kv.at("arrival_rates"));
    c.service_probs = parse_double_list("service_probs", kv.at("service_probs"));
    c.connect_probs = parse_double_list("connect_probs", kv.at("connect_probs"));
    if (const auto im = kv.find("init_max"); im != kv.end())
      c.init_max = static_cast<int>(parse_long("init_max", im->second));
    c.validate();
    return c;
  }
  if (kind->second == "nmodel") {
    NModelConfig c;
    for (const char* req : {"lambda1", "lambda2", "mu1", "mu2", "mu3"})
      if (!kv.count(req))
        throw ConfigError(std::string("custom nmodel env requires ") + req);
    c.lambda1 = parse_double("lambda1", kv.at("lambda1"));
    c.lambda2 = parse_double("lambda2", kv.at("lambda2"));
    c.mu1 = parse_double("mu1", kv.at("mu1"));
    c.mu2 = parse_double("mu2", kv.at("mu2"));
    c.mu3 = parse_double("mu3", kv.at("mu3"));
    if (const auto hc = kv.find("holding_costs"); hc != kv.end())
      c.holding_costs = parse_double_list("holding_costs", hc->second);
    if (const auto im = kv.find("init_max"); im != kv.end())
      c.init_max = static_cast<int>(parse_long("init_max", im->second));
    c.validate();
    return c;
  }
  throw ConfigError("env_kind: expected server-alloc|nmodel, got '" +
                    kind->second + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (steps > 0 && window > steps)
    throw ConfigError("window must be <= steps");
  if (method.is_learner() && method.tw.lower >= method.tw.upper &&
      method.method == "ppo_tw")
    throw ConfigError("tw_lower must be < tw_upper");
  std::visit([](const auto& c) { c.validate(); }, env);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section header
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) +
                                       ": empty key");
    if (kv.count(key))
      throw ConfigError("duplicate config key: " + key);
    kv[key] = value;
  }
  return kv;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv,
                                 std::vector<std::string>* warnings) {
  ExperimentConfig cfg;
  cfg.env = env_from_map(kv, cfg.env_label);

  if (const auto it = kv.find("method"); it != kv.end())
    apply_one(cfg, "method", it->second);
  apply_method_defaults(cfg.method);

  for (const auto& [k, v] : kv) {
    if (k == "method" || kEnvKeys.count(k)) continue;
    apply_one(cfg, k, v);
  }
  cfg.validate();

  if (warnings) {
    if (const std::string advice = shaping_advice(cfg.method.shaping);
        !advice.empty() && cfg.method.is_learner())
      warnings->push_back(advice);
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path,
                                  std::vector<std::string>* warnings) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return config_from_map(parse_key_values(ss.str()), warnings);
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (kEnvKeys.count(key))
    throw ConfigError("cannot override environment key: " + key);
  apply_one(cfg, key, value);
  cfg.validate();
}

namespace {
std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt_num(v[i]);
  }
  return s;
}
}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string s;
  if (cfg.env_label != "custom") {
    s += "env = " + cfg.env_label + "\n";
    std::visit([&](const auto& c) {
      s += "init_max = " + std::to_string(c.init_max) + "\n";
    }, cfg.env);
  } else if (const auto* sa = std::get_if<ServerAllocConfig>(&cfg.env)) {
    s += "env = custom\nenv_kind = server-alloc\n";
    s += "arrival_rates = " + fmt_list(sa->arrival_rates) + "\n";
    s += "service_probs = " + fmt_list(sa->service_probs) + "\n";
    s += "connect_probs = " + fmt_list(sa->connect_probs) + "\n";
    s += "init_max = " + std::to_string(sa->init_max) + "\n";
  } else {
    const auto& nm = std::get<NModelConfig>(cfg.env);
    s += "env = custom\nenv_kind = nmodel\n";
    s += "lambda1 = " + fmt_num(nm.lambda1) + "\n";
    s += "lambda2 = " + fmt_num(nm.lambda2) + "\n";
    s += "mu1 = " + fmt_num(nm.mu1) + "\n";
    s += "mu2 = " + fmt_num(nm.mu2) + "\n";
    s += "mu3 = " + fmt_num(nm.mu3) + "\n";
    s += "holding_costs = " + fmt_list(nm.holding_costs) + "\n";
    s += "init_max = " + std::to_string(nm.init_max) + "\n";
  }

  const MethodConfig& m = cfg.method;
  s += "method = " + m.method + "\n";
  s += "shaping_enabled = " + std::string(m.shaping.enabled ? "true" : "false") + "\n";
  s += "lyapunov_p = " + fmt_num(m.shaping.lyapunov_p) + "\n";
  s += "cost_variant = " + std::string(cost_variant_label(m.shaping.variant)) + "\n";
  s += "state_transform = " + std::string(transform_label(m.transform)) + "\n";
  s += "rollout_len = " + std::to_string(m.ppo.rollout_len) + "\n";
  s += "lr = " + fmt_num(m.ppo.lr) + "\n";
  s += "clip = " + fmt_num(m.ppo.clip) + "\n";
  s += "gae_lambda = " + fmt_num(m.ppo.gae_lambda) + "\n";
  s += "epochs = " + std::to_string(m.ppo.epochs) + "\n";
  s += "minibatches = " + std::to_string(m.ppo.minibatches) + "\n";
  s += "entropy_coef = " + fmt_num(m.ppo.entropy_coef) + "\n";
  s += "vf_coef = " + fmt_num(m.ppo.vf_coef) + "\n";
  s += "max_grad_norm = " + fmt_num(m.ppo.max_grad_norm) + "\n";
  s += "adam_beta1 = " + fmt_num(m.ppo.adam_beta1) + "\n";
  s += "adam_beta2 = " + fmt_num(m.ppo.adam_beta2) + "\n";
  s += "eta_mode = " + std::string(m.ppo.eta_mode == PpoHyper::EtaMode::ema
                                       ? "ema"
                                       : "buffer_mean") + "\n";
  s += "eta_ema_alpha = " + fmt_num(m.ppo.eta_ema_alpha) + "\n";
  s += "tw_upper = " + std::to_string(m.tw.upper) + "\n";
  s += "tw_lower = " + std::to_string(m.tw.lower) + "\n";

  s += "steps = " + std::to_string(cfg.steps) + "\n";
  s += "trials = " + std::to_string(cfg.trials) + "\n";
  s += "seed = " + std::to_string(cfg.base_seed) + "\n";
  s += "out = " + cfg.out_dir + "\n";
  s += "window = " + std::to_string(cfg.window) + "\n";
  s += "raw = " + std::string(cfg.raw ? "true" : "false") + "\n";
  s += "workers = " + std::to_string(cfg.workers) + "\n";
  s += "visit_grid = " + std::string(cfg.visit_grid ? "true" : "false") + "\n";
  s += "visit_grid_max = " + std::to_string(cfg.visit_grid_max) + "\n";
  if (!cfg.checkpoint_out.empty())
    s += "checkpoint_out = " + cfg.checkpoint_out + "\n";
  return s;
}

}  // namespace qstab
