#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rbi/experiments.hpp"

namespace rbi::cli {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) throw ConfigError(where + ": unknown field '" + item.key() + "'");
  }
}

template <class T>
struct is_count_vector : std::false_type {};
template <>
struct is_count_vector<std::vector<std::size_t>> : std::true_type {};

template <class T>
T read(const json& j, const char* key, const T& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!v.is_number_unsigned()) throw ConfigError(where + "." + key + ": expected a non-negative integer");
  } else if constexpr (is_count_vector<T>::value) {
    if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array");
    for (const auto& x : v) {
      if (!x.is_number_unsigned()) throw ConfigError(where + "." + key + ": expected non-negative integers");
    }
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

// ---------------------------------------------------------------- constraints

inline ConstraintSpec constraint_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  const std::string kind = read<std::string>(j, "kind", "", where);
  try {
    if (kind == "reroute") {
      check_keys(j, {"kind", "c_min", "c_max"}, where);
      return make_reroute(read(j, "c_min", 0.5, where), read(j, "c_max", 1.5, where));
    }
    if (kind == "tv") {
      check_keys(j, {"kind", "delta"}, where);
      return make_tv(read(j, "delta", 0.25, where));
    }
    if (kind == "ppo") {
      check_keys(j, {"kind", "epsilon"}, where);
      return make_ppo(read(j, "epsilon", 0.5, where));
    }
    if (kind == "forward_kl") {
      check_keys(j, {"kind", "lambda"}, where);
      return make_forward_kl(read(j, "lambda", 1.0, where));
    }
    if (kind == "greedy") {
      check_keys(j, {"kind"}, where);
      return make_greedy();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".kind: expected reroute, tv, ppo, forward_kl or greedy");
}

inline json to_json(const ConstraintSpec& spec) {
  json j{{"kind", kind_name(spec)}};
  if (auto* r = std::get_if<constraint::Reroute>(&spec)) {
    j["c_min"] = r->params.c_min;
    j["c_max"] = r->params.c_max;
  } else if (auto* t = std::get_if<constraint::Tv>(&spec)) {
    j["delta"] = t->delta;
  } else if (auto* p = std::get_if<constraint::Ppo>(&spec)) {
    j["epsilon"] = p->epsilon;
  } else if (auto* k = std::get_if<constraint::ForwardKl>(&spec)) {
    j["lambda"] = k->lambda;
  }
  return j;
}

inline std::vector<ConstraintSpec> constraints_from_json(const json& j, const char* key,
                                                         const std::vector<ConstraintSpec>& fallback,
                                                         const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& arr = j.at(key);
  if (!arr.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  std::vector<ConstraintSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(constraint_from_json(arr[i], where + "." + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline json to_json(const std::vector<ConstraintSpec>& specs) {
  json arr = json::array();
  for (const auto& s : specs) arr.push_back(to_json(s));
  return arr;
}

inline GaussianBandit bandit_from_json(const json& j, const GaussianBandit& fallback, const std::string& where) {
  const auto mu = read(j, "mu", std::vector<double>{fallback.mu1, fallback.mu2}, where);
  const auto sigma = read(j, "sigma", std::vector<double>{fallback.sigma1, fallback.sigma2}, where);
  if (mu.size() != 2 || sigma.size() != 2) throw ConfigError(where + ": mu and sigma need two entries");
  try {
    return GaussianBandit(mu[0], mu[1], sigma[0], sigma[1]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

// ---------------------------------------------------------------- experiment blocks

struct SolveParams {
  std::vector<double> beta;
  std::vector<double> adv;
  ConstraintSpec constraint = make_reroute(0.5, 1.5);
};

inline SolveParams solve_from_json(const json& j) {
  const std::string w = "params";
  check_keys(j, {"beta", "adv", "constraint"}, w);
  SolveParams p;
  p.beta = read(j, "beta", std::vector<double>{}, w);
  p.adv = read(j, "adv", std::vector<double>{}, w);
  if (p.beta.empty() || p.adv.empty()) throw ConfigError("params: beta and adv are required");
  if (j.contains("constraint")) p.constraint = constraint_from_json(j.at("constraint"), w + ".constraint");
  return p;
}

inline json to_json(const SolveParams& p) {
  return {{"beta", p.beta}, {"adv", p.adv}, {"constraint", to_json(p.constraint)}};
}

inline experiments::PenaltySuiteConfig penalty_from_json(const json& j) {
  const std::string w = "params";
  check_keys(j, {"n_trials", "min_states", "max_states", "min_actions", "max_actions", "gamma", "n_episodes",
                 "constraints"},
             w);
  experiments::PenaltySuiteConfig c;
  c.n_trials = read(j, "n_trials", c.n_trials, w);
  c.min_states = read(j, "min_states", c.min_states, w);
  c.max_states = read(j, "max_states", c.max_states, w);
  c.min_actions = read(j, "min_actions", c.min_actions, w);
  c.max_actions = read(j, "max_actions", c.max_actions, w);
  c.gamma = read(j, "gamma", c.gamma, w);
  c.n_episodes = read(j, "n_episodes", c.n_episodes, w);
  c.constraints = constraints_from_json(j, "constraints", c.constraints, w);
  return c;
}

inline json to_json(const experiments::PenaltySuiteConfig& c) {
  return {{"n_trials", c.n_trials},       {"min_states", c.min_states}, {"max_states", c.max_states},
          {"min_actions", c.min_actions}, {"max_actions", c.max_actions}, {"gamma", c.gamma},
          {"n_episodes", c.n_episodes},   {"constraints", to_json(c.constraints)}};
}

inline experiments::BanditRegretConfig regret_from_json(const json& j) {
  const std::string w = "params";
  check_keys(j, {"mu", "sigma", "beta_a2", "n_samples", "constraints"}, w);
  experiments::BanditRegretConfig c;
  c.bandit = bandit_from_json(j, c.bandit, w);
  c.beta_a2 = read(j, "beta_a2", c.beta_a2, w);
  c.n_samples = read(j, "n_samples", c.n_samples, w);
  c.constraints = constraints_from_json(j, "constraints", c.constraints, w);
  return c;
}

inline json to_json(const experiments::BanditRegretConfig& c) {
  return {{"mu", {c.bandit.mu1, c.bandit.mu2}},
          {"sigma", {c.bandit.sigma1, c.bandit.sigma2}},
          {"beta_a2", c.beta_a2},
          {"n_samples", c.n_samples},
          {"constraints", to_json(c.constraints)}};
}

inline LearningRate lr_from_json(const json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "inverse_count") return InverseCount{};
  if (j.is_object()) {
    check_keys(j, {"constant"}, where);
    if (j.contains("constant") && j.at("constant").is_number()) return ConstantRate{j.at("constant").get<double>()};
  }
  throw ConfigError(where + ": expected \"inverse_count\" or {\"constant\": alpha}");
}

inline json to_json(const LearningRate& lr) {
  if (auto* c = std::get_if<ConstantRate>(&lr)) return {{"constant", c->alpha}};
  return "inverse_count";
}

inline experiments::BanditLearnExperiment learn_from_json(const json& j) {
  const std::string w = "params";
  check_keys(j, {"scenarios", "constraints", "epsilon_explore", "pi_floor", "warmup_samples", "horizon", "n_seeds",
                 "q_init"},
             w);
  experiments::BanditLearnExperiment c;
  if (j.contains("scenarios")) {
    const json& arr = j.at("scenarios");
    if (!arr.is_array()) throw ConfigError("params.scenarios: expected an array");
    c.scenarios.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string sw = "params.scenarios[" + std::to_string(i) + "]";
      check_keys(arr[i], {"name", "mu", "sigma", "lr_schedule"}, sw);
      experiments::Scenario sc{read<std::string>(arr[i], "name", "scenario" + std::to_string(i), sw),
                               bandit_from_json(arr[i], GaussianBandit(-1.0, 1.0, 1.0, 1.0), sw), InverseCount{}};
      if (arr[i].contains("lr_schedule")) sc.lr_schedule = lr_from_json(arr[i].at("lr_schedule"), sw + ".lr_schedule");
      c.scenarios.push_back(sc);
    }
  }
  c.constraints = constraints_from_json(j, "constraints", c.constraints, w);
  c.base.epsilon_explore = read(j, "epsilon_explore", c.base.epsilon_explore, w);
  c.base.pi_floor = read(j, "pi_floor", c.base.pi_floor, w);
  c.base.warmup_samples = read(j, "warmup_samples", c.base.warmup_samples, w);
  c.base.horizon = read(j, "horizon", c.base.horizon, w);
  c.base.n_seeds = read(j, "n_seeds", c.base.n_seeds, w);
  c.base.q_init = read(j, "q_init", c.base.q_init, w);
  return c;
}

inline json to_json(const experiments::BanditLearnExperiment& c) {
  json scenarios = json::array();
  for (const auto& sc : c.scenarios) {
    scenarios.push_back({{"name", sc.name},
                         {"mu", {sc.bandit.mu1, sc.bandit.mu2}},
                         {"sigma", {sc.bandit.sigma1, sc.bandit.sigma2}},
                         {"lr_schedule", to_json(sc.lr_schedule)}});
  }
  return {{"scenarios", scenarios},
          {"constraints", to_json(c.constraints)},
          {"epsilon_explore", c.base.epsilon_explore},
          {"pi_floor", c.base.pi_floor},
          {"warmup_samples", c.base.warmup_samples},
          {"horizon", c.base.horizon},
          {"n_seeds", c.base.n_seeds},
          {"q_init", c.base.q_init}};
}

struct TrainParams {
  harness::GridWorld env;
  harness::HarnessConfig harness;
  bool write_snapshots = false;
};

inline harness::GridWorld gridworld_from_json(const json& j) {
  const std::string w = "params.gridworld";
  check_keys(j, {"width", "height", "start_x", "start_y", "goals", "step_cost", "slip", "max_episode_steps"}, w);
  harness::GridWorld g;
  g.width = read(j, "width", g.width, w);
  g.height = read(j, "height", g.height, w);
  g.start_x = read(j, "start_x", g.start_x, w);
  g.start_y = read(j, "start_y", g.start_y, w);
  g.step_cost = read(j, "step_cost", g.step_cost, w);
  g.slip = read(j, "slip", g.slip, w);
  g.max_episode_steps = read(j, "max_episode_steps", g.max_episode_steps, w);
  if (j.contains("goals")) {
    const json& arr = j.at("goals");
    if (!arr.is_array()) throw ConfigError(w + ".goals: expected an array");
    g.goals.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string gw = w + ".goals[" + std::to_string(i) + "]";
      check_keys(arr[i], {"x", "y", "reward"}, gw);
      g.goals.push_back({read<std::size_t>(arr[i], "x", 0, gw), read<std::size_t>(arr[i], "y", 0, gw),
                         read(arr[i], "reward", 1.0, gw)});
    }
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(w + ": " + e.what());
  }
  return g;
}

inline json to_json(const harness::GridWorld& g) {
  json goals = json::array();
  for (const auto& goal : g.goals) goals.push_back({{"x", goal.x}, {"y", goal.y}, {"reward", goal.reward}});
  return {{"width", g.width}, {"height", g.height},       {"start_x", g.start_x},
          {"start_y", g.start_y}, {"goals", goals},       {"step_cost", g.step_cost},
          {"slip", g.slip},       {"max_episode_steps", g.max_episode_steps}};
}

inline TrainParams train_from_json(const json& j) {
  const std::string w = "params";
  check_keys(j, {"gridworld", "c_min", "c_max", "c_greedy", "c_mix_offset", "priority_exponent", "batch_size",
                 "n_actors", "n_step", "snapshot_every_batches", "actor_reload_every_steps",
                 "target_update_every_batches", "learning_rate", "exploration_epsilon", "gamma", "env_step_budget",
                 "env_steps_per_batch", "max_actor_lead_batches", "eval_every_batches", "replay_capacity",
                 "sampling", "schedule", "write_snapshots"},
             w);
  TrainParams p;
  if (j.contains("gridworld")) p.env = gridworld_from_json(j.at("gridworld"));
  harness::HarnessConfig& c = p.harness;
  c.c_min = read(j, "c_min", c.c_min, w);
  c.c_max = read(j, "c_max", c.c_max, w);
  c.c_greedy = read(j, "c_greedy", c.c_greedy, w);
  c.c_mix_offset = read(j, "c_mix_offset", c.c_mix_offset, w);
  c.priority_exponent = read(j, "priority_exponent", c.priority_exponent, w);
  c.batch_size = read(j, "batch_size", c.batch_size, w);
  c.n_actors = read(j, "n_actors", c.n_actors, w);
  c.n_step = read(j, "n_step", c.n_step, w);
  c.snapshot_every_batches = read(j, "snapshot_every_batches", c.snapshot_every_batches, w);
  c.actor_reload_every_steps = read(j, "actor_reload_every_steps", c.actor_reload_every_steps, w);
  c.target_update_every_batches = read(j, "target_update_every_batches", c.target_update_every_batches, w);
  c.learning_rate = read(j, "learning_rate", c.learning_rate, w);
  c.exploration_epsilon = read(j, "exploration_epsilon", c.exploration_epsilon, w);
  c.gamma = read(j, "gamma", c.gamma, w);
  c.env_step_budget = read(j, "env_step_budget", c.env_step_budget, w);
  c.env_steps_per_batch = read(j, "env_steps_per_batch", c.env_steps_per_batch, w);
  c.max_actor_lead_batches = read(j, "max_actor_lead_batches", c.max_actor_lead_batches, w);
  c.eval_every_batches = read(j, "eval_every_batches", c.eval_every_batches, w);
  c.replay_capacity = read(j, "replay_capacity", c.replay_capacity, w);
  const std::string sampling = read<std::string>(j, "sampling", "uniform", w);
  if (sampling == "uniform") {
    c.sampling = harness::SamplingMode::uniform;
  } else if (sampling == "priority") {
    c.sampling = harness::SamplingMode::priority;
  } else {
    throw ConfigError("params.sampling: expected uniform or priority");
  }
  const std::string schedule = read<std::string>(j, "schedule", "deterministic", w);
  if (schedule == "deterministic") {
    c.schedule = harness::ScheduleMode::deterministic;
  } else if (schedule == "concurrent") {
    c.schedule = harness::ScheduleMode::concurrent;
  } else {
    throw ConfigError("params.schedule: expected deterministic or concurrent");
  }
  p.write_snapshots = read(j, "write_snapshots", p.write_snapshots, w);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return p;
}

inline json to_json(const TrainParams& p) {
  const harness::HarnessConfig& c = p.harness;
  return {{"gridworld", to_json(p.env)},
          {"c_min", c.c_min},
          {"c_max", c.c_max},
          {"c_greedy", c.c_greedy},
          {"c_mix_offset", c.c_mix_offset},
          {"priority_exponent", c.priority_exponent},
          {"batch_size", c.batch_size},
          {"n_actors", c.n_actors},
          {"n_step", c.n_step},
          {"snapshot_every_batches", c.snapshot_every_batches},
          {"actor_reload_every_steps", c.actor_reload_every_steps},
          {"target_update_every_batches", c.target_update_every_batches},
          {"learning_rate", c.learning_rate},
          {"exploration_epsilon", c.exploration_epsilon},
          {"gamma", c.gamma},
          {"env_step_budget", c.env_step_budget},
          {"env_steps_per_batch", c.env_steps_per_batch},
          {"max_actor_lead_batches", c.max_actor_lead_batches},
          {"eval_every_batches", c.eval_every_batches},
          {"replay_capacity", c.replay_capacity},
          {"sampling", c.sampling == harness::SamplingMode::uniform ? "uniform" : "priority"},
          {"schedule", c.schedule == harness::ScheduleMode::deterministic ? "deterministic" : "concurrent"},
          {"write_snapshots", p.write_snapshots}};
}

// ---------------------------------------------------------------- top level

using Params = std::variant<SolveParams, experiments::PenaltySuiteConfig, experiments::BanditRegretConfig,
                            experiments::BanditLearnExperiment, TrainParams>;

struct ExperimentConfig {
  std::string experiment;
  Params params;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool plot = true;
};

inline ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"experiment", "params", "output_dir", "seed", "plot"}, "config");
  ExperimentConfig c;
  c.experiment = read<std::string>(j, "experiment", "", "config");
  c.output_dir = read<std::string>(j, "output_dir", "out/" + c.experiment, "config");
  c.seed = read<std::uint64_t>(j, "seed", 0, "config");
  c.plot = read(j, "plot", true, "config");
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (c.experiment == "solve") {
    c.params = solve_from_json(params);
  } else if (c.experiment == "penalty-suite") {
    c.params = penalty_from_json(params);
  } else if (c.experiment == "bandit-regret") {
    c.params = regret_from_json(params);
  } else if (c.experiment == "bandit-learn") {
    c.params = learn_from_json(params);
  } else if (c.experiment == "train") {
    c.params = train_from_json(params);
  } else {
    throw ConfigError("config.experiment: expected solve, penalty-suite, bandit-regret, bandit-learn or train");
  }
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json params = std::visit([](const auto& p) { return to_json(p); }, c.params);
  return {{"experiment", c.experiment},
          {"params", params},
          {"output_dir", c.output_dir},
          {"seed", c.seed},
          {"plot", c.plot}};
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace rbi::cli
