#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rbi/bandit.hpp"
#include "rbi/csv.hpp"
#include "rbi/harness/training.hpp"
#include "rbi/mdp.hpp"
#include "rbi/parallel.hpp"
#include "rbi/random.hpp"
#include "rbi/solvers.hpp"

namespace rbi::experiments {

/// c_min (reroute only) and the family's main parameter: c_max, delta, epsilon or lambda.
struct SpecColumns {
  bool has_c_min = false;
  double c_min = 0.0;
  bool has_param = false;
  double param = 0.0;
};

inline SpecColumns spec_columns(const ConstraintSpec& spec) {
  SpecColumns out;
  if (auto* r = std::get_if<constraint::Reroute>(&spec)) {
    out = {true, r->params.c_min, true, r->params.c_max};
  } else if (auto* t = std::get_if<constraint::Tv>(&spec)) {
    out = {false, 0.0, true, t->delta};
  } else if (auto* p = std::get_if<constraint::Ppo>(&spec)) {
    out = {false, 0.0, true, p->epsilon};
  } else if (auto* k = std::get_if<constraint::ForwardKl>(&spec)) {
    out = {false, 0.0, true, k->lambda};
  }
  return out;
}

// ---------------------------------------------------------------- penalty suite

struct PenaltySuiteConfig {
  std::size_t n_trials = 50;
  std::size_t min_states = 2;
  std::size_t max_states = 20;
  std::size_t min_actions = 2;
  std::size_t max_actions = 5;
  double gamma = 0.9;
  std::vector<std::size_t> n_episodes{30, 300, 3000};
  std::vector<ConstraintSpec> constraints{make_reroute(0.5, 1.5), make_tv(0.25), make_greedy()};

  void validate() const {
    if (n_trials == 0) throw std::invalid_argument("penalty-suite: n_trials must be >= 1");
    if (min_states == 0 || min_states > max_states) throw std::invalid_argument("penalty-suite: bad state range");
    if (min_actions == 0 || min_actions > max_actions) throw std::invalid_argument("penalty-suite: bad action range");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("penalty-suite: gamma must lie in (0, 1)");
    if (n_episodes.empty() || constraints.empty()) {
      throw std::invalid_argument("penalty-suite: need at least one sample size and one constraint");
    }
    for (std::size_t n : n_episodes) {
      if (n == 0) throw std::invalid_argument("penalty-suite: n_episodes entries must be >= 1");
    }
  }
};

/// One (trial, constraint, sample size) cell, reported at the state where
/// realized_gap + penalty_bound is smallest.
struct PenaltyRow {
  std::size_t trial = 0;
  ConstraintSpec constraint;
  std::size_t n_episodes = 0;
  std::size_t state = 0;
  double v_beta = 0.0;
  double v_pi = 0.0;
  double penalty_bound = 0.0;
  double realized_gap = 0.0;

  double margin() const { return realized_gap + penalty_bound; }
};

inline std::vector<PenaltyRow> run_penalty_suite(const PenaltySuiteConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<std::vector<PenaltyRow>> per_trial(config.n_trials);
  parallel_tasks(config.n_trials, [&](std::size_t trial) {
    throw_if_cancelled();
    Engine rng = make_engine(seed, 0x50454e0000ULL + trial);
    const std::size_t ns = config.min_states + uniform_index(rng, config.max_states - config.min_states + 1);
    const std::size_t na = config.min_actions + uniform_index(rng, config.max_actions - config.min_actions + 1);
    const TabularMDP mdp = random_mdp(ns, na, config.gamma, splitmix64(seed ^ (0x9e37ULL + trial)));
    const PolicyTable beta = random_policy(ns, na, rng);
    const EvaluationResult eb = evaluate_policy(mdp, beta);
    const std::size_t horizon = default_horizon(config.gamma);

    for (std::size_t k = 0; k < config.n_episodes.size(); ++k) {
      const std::size_t n = config.n_episodes[k];
      const McEstimate mc = mc_q_estimate(mdp, beta, n, horizon, splitmix64(seed + 1000003ULL * trial + k));
      const StateActionValues q_hat = impute_missing(mc);
      StateActionValues eps(ns, na);
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t a = 0; a < na; ++a) eps(s, a) = eb.q(s, a) - q_hat(s, a);
      }
      for (const ConstraintSpec& spec : config.constraints) {
        const PolicyTable pi = apply_step(mdp, beta, q_hat, spec);
        const EvaluationResult ep = evaluate_policy(mdp, pi);
        const std::vector<double> penalty = improvement_penalty(mdp, beta, pi, eps);
        PenaltyRow row{trial, spec, n, 0, 0.0, 0.0, 0.0, 0.0};
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < ns; ++s) {
          const double gap = ep.v[s] - eb.v[s];
          if (gap + penalty[s] < best) {
            best = gap + penalty[s];
            row.state = s;
            row.v_beta = eb.v[s];
            row.v_pi = ep.v[s];
            row.penalty_bound = penalty[s];
            row.realized_gap = gap;
          }
        }
        per_trial[trial].push_back(row);
      }
    }
  });
  std::vector<PenaltyRow> out;
  for (auto& rows : per_trial) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

inline std::string penalty_csv(const std::vector<PenaltyRow>& rows) {
  csv::Writer w({"trial", "constraint", "c_min", "param", "n_episodes", "v_beta", "v_pi", "penalty_bound",
                 "realized_gap"});
  for (const auto& r : rows) {
    const SpecColumns cols = spec_columns(r.constraint);
    w.field(r.trial).field(kind_name(r.constraint));
    cols.has_c_min ? w.field(cols.c_min) : w.empty();
    cols.has_param ? w.field(cols.param) : w.empty();
    w.field(r.n_episodes).field(r.v_beta).field(r.v_pi).field(r.penalty_bound).field(r.realized_gap);
    w.end_row();
  }
  return w.str();
}

// ---------------------------------------------------------------- bandit regret

struct BanditRegretConfig {
  GaussianBandit bandit{-1.0, 1.0, 2.0, 2.0};
  std::vector<double> beta_a2{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5,
                              0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  std::vector<double> n_samples{10, 50, 200};
  std::vector<ConstraintSpec> constraints{make_greedy(), make_reroute(0.5, 1.5), make_tv(0.25), make_ppo(0.5)};

  void validate() const {
    if (beta_a2.empty() || n_samples.empty() || constraints.empty()) {
      throw std::invalid_argument("bandit-regret: beta_a2, n_samples and constraints must be non-empty");
    }
    for (double b : beta_a2) {
      if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("bandit-regret: beta_a2 entries must lie in (0, 1)");
    }
    for (double n : n_samples) {
      if (!(n >= 1.0)) throw std::invalid_argument("bandit-regret: n_samples entries must be >= 1");
    }
    for (const auto& spec : constraints) {
      if (!is_rank_based(spec)) throw std::invalid_argument("bandit-regret: forward_kl is not rank based");
    }
  }
};

struct RegretRow {
  double beta_a2 = 0.0;
  double n_samples = 0.0;
  ConstraintSpec constraint;
  double regret_diff = 0.0;
};

inline std::vector<RegretRow> run_bandit_regret(const BanditRegretConfig& config) {
  config.validate();
  std::vector<RegretRow> out;
  for (double n : config.n_samples) {
    for (const auto& spec : config.constraints) {
      for (double b2 : config.beta_a2) {
        const ProbVector beta({1.0 - b2, b2});
        out.push_back({b2, n, spec, step_regret_diff(config.bandit, beta, n, spec)});
      }
    }
  }
  return out;
}

inline std::string regret_csv(const std::vector<RegretRow>& rows) {
  csv::Writer w({"beta_a2", "n_samples", "constraint", "regret_diff"});
  for (const auto& r : rows) w.field(r.beta_a2).field(r.n_samples).field(label(r.constraint)).field(r.regret_diff).end_row();
  return w.str();
}

// ---------------------------------------------------------------- bandit learning curves

struct Scenario {
  std::string name;
  GaussianBandit bandit;
  LearningRate lr_schedule;
};

struct BanditLearnExperiment {
  std::vector<Scenario> scenarios{
      {"easy", GaussianBandit(-1.0, 1.0, 2.0, 0.5), InverseCount{}},
      {"hard", GaussianBandit(-1.0, 1.0, 0.5, 2.0), ConstantRate{0.01}},
  };
  std::vector<ConstraintSpec> constraints{make_reroute(0.5, 1.5), make_greedy(), make_tv(0.25), make_ppo(0.5),
                                          make_forward_kl(1.0)};
  /// lr_schedule and constraint are taken from each scenario and constraint entry.
  BanditLearnConfig base;

  void validate() const {
    if (scenarios.empty() || constraints.empty()) {
      throw std::invalid_argument("bandit-learn: scenarios and constraints must be non-empty");
    }
    base.validate();
  }
};

struct CurveRow {
  std::string scenario;
  ConstraintSpec constraint;
  std::string lr_schedule;
  std::size_t seed_count = 0;
  std::size_t step = 0;
  double mean_regret = 0.0;
};

inline std::vector<CurveRow> run_bandit_learn(const BanditLearnExperiment& config, std::uint64_t seed) {
  config.validate();
  std::vector<CurveRow> out;
  for (const auto& sc : config.scenarios) {
    for (const auto& spec : config.constraints) {
      throw_if_cancelled();
      BanditLearnConfig c = config.base;
      c.lr_schedule = sc.lr_schedule;
      c.constraint = spec;
      const std::vector<double> curve = run_learning_curve(sc.bandit, c, seed);
      for (std::size_t t = 0; t < curve.size(); ++t) {
        out.push_back({sc.name, spec, lr_label(sc.lr_schedule), c.n_seeds, t + 1, curve[t]});
      }
    }
  }
  return out;
}

inline std::string curve_csv(const std::vector<CurveRow>& rows) {
  csv::Writer w({"scenario", "constraint", "lr_schedule", "seed_count", "step", "mean_regret"});
  for (const auto& r : rows) {
    w.field(r.scenario).field(label(r.constraint)).field(r.lr_schedule).field(r.seed_count).field(r.step);
    w.field(r.mean_regret).end_row();
  }
  return w.str();
}

/// Mean of curve over steps [from, to] counted from 1.
inline double window_mean(const std::vector<double>& curve, std::size_t from, std::size_t to) {
  double sum = 0.0;
  for (std::size_t t = from; t <= to; ++t) sum += curve.at(t - 1);
  return sum / static_cast<double>(to - from + 1);
}

// ---------------------------------------------------------------- training

inline std::string train_csv(const harness::TrainingReport& report) {
  csv::Writer w({"wall_step", "env_steps", "batches", "eval_return", "kl_loss", "q_loss", "buffer_size"});
  for (const auto& r : report.rows) {
    w.field(r.wall_step).field(r.env_steps).field(r.batches).field(r.eval_return).field(r.kl_loss);
    w.field(r.q_loss).field(r.buffer_size).end_row();
  }
  return w.str();
}

}  // namespace rbi::experiments
