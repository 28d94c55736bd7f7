#pragma once

// Two-armed Gaussian bandit: closed-form regret difference of a single
// improvement step taken from a batch, and seeded iterative learning curves.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rbi/parallel.hpp"
#include "rbi/prob.hpp"
#include "rbi/random.hpp"
#include "rbi/solvers.hpp"

namespace rbi {

/// Arm i pays N(mu_i, sigma_i^2). Arm 2 (index 1) is the better arm.
struct GaussianBandit {
  double mu1 = -1.0;
  double mu2 = 1.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;

  GaussianBandit() = default;
  GaussianBandit(double m1, double m2, double s1, double s2) : mu1(m1), mu2(m2), sigma1(s1), sigma2(s2) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw std::invalid_argument("GaussianBandit: sigma entries must be > 0");
    if (m2 < m1) throw std::invalid_argument("GaussianBandit: convention mu2 >= mu1");
  }

  double mean(std::size_t arm) const { return arm == 0 ? mu1 : mu2; }
  double sd(std::size_t arm) const { return arm == 0 ? sigma1 : sigma2; }
  double value(const ProbVector& pi) const { return pi[0] * mu1 + pi[1] * mu2; }
};

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Probability that the empirical mean of arm 2 beats arm 1 when arm i is
/// sampled n_samples * beta_i times.
inline double clean_event_prob(const GaussianBandit& bandit, const ProbVector& beta, double n_samples) {
  if (beta.size() != 2) throw std::invalid_argument("clean_event_prob: two-armed bandit needs |beta| = 2");
  if (!(beta[0] > 0.0) || !(beta[1] > 0.0)) {
    throw std::invalid_argument("clean_event_prob: every arm needs beta > 0 (standard error undefined)");
  }
  if (!(n_samples >= 1.0)) throw std::invalid_argument("clean_event_prob: n_samples must be >= 1");
  const double se = std::sqrt(bandit.sigma1 * bandit.sigma1 / (n_samples * beta[0]) +
                              bandit.sigma2 * bandit.sigma2 / (n_samples * beta[1]));
  return standard_normal_cdf((bandit.mu2 - bandit.mu1) / se);
}

/// R_beta - R_pi = P(I) V_pi|I + (1 - P(I)) V_pi|not I - V_beta for a rank-based
/// step. Under I the step sees arm 2 ranked best, otherwise arm 1.
inline double step_regret_diff(const GaussianBandit& bandit, const ProbVector& beta, double n_samples,
                               const ConstraintSpec& spec) {
  if (!is_rank_based(spec)) {
    throw std::invalid_argument("step_regret_diff: forward_kl depends on advantage magnitudes, not only ranking");
  }
  const double p_clean = clean_event_prob(bandit, beta, n_samples);
  const std::vector<double> arm2_best{0.0, 1.0};
  const std::vector<double> arm1_best{1.0, 0.0};
  const ProbVector pi_clean = solve(spec, beta, center_advantage(beta, arm2_best));
  const ProbVector pi_bad = solve(spec, beta, center_advantage(beta, arm1_best));
  return p_clean * bandit.value(pi_clean) + (1.0 - p_clean) * bandit.value(pi_bad) - bandit.value(beta);
}

struct InverseCount {};
struct ConstantRate {
  double alpha;
};
using LearningRate = std::variant<InverseCount, ConstantRate>;

inline std::string lr_label(const LearningRate& lr) {
  if (auto* c = std::get_if<ConstantRate>(&lr)) {
    std::ostringstream out;
    out << "constant(" << c->alpha << ')';
    return out.str();
  }
  return "inverse_count";
}

struct BanditLearnConfig {
  double epsilon_explore = 0.1;
  LearningRate lr_schedule = InverseCount{};
  double pi_floor = 1e-3;
  std::size_t warmup_samples = 10;
  std::size_t horizon = 1000;
  std::size_t n_seeds = 100;
  double q_init = 0.0;
  ConstraintSpec constraint = make_reroute(0.5, 1.5);

  void validate() const {
    if (!(epsilon_explore >= 0.0 && epsilon_explore < 1.0)) {
      throw std::invalid_argument("BanditLearnConfig: epsilon_explore must lie in [0, 1)");
    }
    if (!(pi_floor > 0.0 && pi_floor < 0.5)) throw std::invalid_argument("BanditLearnConfig: pi_floor must lie in (0, 1/2)");
    if (auto* c = std::get_if<ConstantRate>(&lr_schedule); c && !(c->alpha > 0.0 && c->alpha <= 1.0)) {
      throw std::invalid_argument("BanditLearnConfig: constant learning rate must lie in (0, 1]");
    }
    if (horizon == 0) throw std::invalid_argument("BanditLearnConfig: horizon must be >= 1");
    if (n_seeds == 0) throw std::invalid_argument("BanditLearnConfig: n_seeds must be >= 1");
    if (!std::isfinite(q_init)) throw std::invalid_argument("BanditLearnConfig: q_init must be finite");
  }
};

/// Raises every entry to at least `floor` and rescales the rest so the total
/// stays 1. Entries pushed below the floor by the rescale are pinned in turn.
inline ProbVector clip_to_floor(const ProbVector& pi, double floor) {
  const std::size_t n = pi.size();
  if (!(floor > 0.0) || floor * static_cast<double>(n) >= 1.0) {
    throw std::invalid_argument("clip_to_floor: floor must lie in (0, 1/n)");
  }
  std::vector<bool> pinned(n, false);
  std::vector<double> out(pi.begin(), pi.end());
  for (bool changed = true; changed;) {
    changed = false;
    double free_mass = 0.0;
    std::size_t n_pinned = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) {
        ++n_pinned;
      } else {
        free_mass += pi[i];
      }
    }
    const double target = 1.0 - floor * static_cast<double>(n_pinned);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = pinned[i] ? floor : pi[i] * target / free_mass;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!pinned[i] && out[i] < floor) {
        pinned[i] = true;
        changed = true;
      }
    }
  }
  return ProbVector(std::move(out));
}

/// beta = (1 - eps) pi + eps / n.
inline ProbVector mix_exploration(const ProbVector& pi, double epsilon) {
  std::vector<double> out(pi.size());
  const double floor = epsilon / static_cast<double>(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[i] = (1.0 - epsilon) * pi[i] + floor;
  return ProbVector(std::move(out));
}

/// Per-step record of one learning run, kept for invariant checks.
struct BanditTrace {
  std::vector<double> regret;
  std::vector<ProbVector> behavior;
  std::vector<ProbVector> unclipped;
};

/// One seeded replica. Each step: act with the current behavior beta, update
/// the pulled arm's Q, then recompute pi = clip(solver(beta, Q - sum pi Q))
/// and beta = mix(pi).
inline BanditTrace run_learning_replica(const GaussianBandit& bandit, const BanditLearnConfig& config,
                                        std::uint64_t seed, std::uint64_t replica, bool keep_policies = false) {
  config.validate();
  Engine rng = make_engine(seed, replica);
  std::normal_distribution<double> noise(0.0, 1.0);
  double q[2] = {config.q_init, config.q_init};
  double pulls[2] = {0.0, 0.0};

  auto update = [&](std::size_t arm, double reward) {
    pulls[arm] += 1.0;
    const double alpha = std::holds_alternative<InverseCount>(config.lr_schedule)
                             ? 1.0 / pulls[arm]
                             : std::get<ConstantRate>(config.lr_schedule).alpha;
    q[arm] = (1.0 - alpha) * q[arm] + alpha * reward;
  };
  auto pull = [&](std::size_t arm) { return bandit.mean(arm) + bandit.sd(arm) * noise(rng); };

  for (std::size_t i = 0; i < config.warmup_samples; ++i) {
    const std::size_t arm = uniform_index(rng, 2);
    update(arm, pull(arm));
  }

  BanditTrace trace;
  trace.regret.reserve(config.horizon);
  ProbVector pi = ProbVector::uniform(2);
  ProbVector beta = mix_exploration(pi, config.epsilon_explore);
  for (std::size_t t = 0; t < config.horizon; ++t) {
    const std::size_t arm = sample_categorical(beta.values(), rng);
    update(arm, pull(arm));
    trace.regret.push_back(bandit.mu2 - bandit.value(beta));
    if (keep_policies) trace.behavior.push_back(beta);

    const double baseline = pi[0] * q[0] + pi[1] * q[1];
    const AdvantageVector adv({q[0] - baseline, q[1] - baseline});
    ProbVector next = solve(config.constraint, beta, adv);
    if (keep_policies) trace.unclipped.push_back(next);
    pi = clip_to_floor(next, config.pi_floor);
    beta = mix_exploration(pi, config.epsilon_explore);
  }
  return trace;
}

/// Mean instantaneous regret mu2 - sum_a beta(a) mu_a per step, averaged over
/// config.n_seeds replicas. Replica k always uses stream (seed, k), and the
/// average is summed in replica order.
inline std::vector<double> run_learning_curve(const GaussianBandit& bandit, const BanditLearnConfig& config,
                                              std::uint64_t seed) {
  config.validate();
  std::vector<std::vector<double>> per_replica(config.n_seeds);
  parallel_tasks(config.n_seeds, [&](std::size_t k) {
    per_replica[k] = run_learning_replica(bandit, config, seed, k).regret;
  });
  std::vector<double> mean(config.horizon, 0.0);
  for (const auto& r : per_replica) {
    for (std::size_t t = 0; t < config.horizon; ++t) mean[t] += r[t];
  }
  for (double& m : mean) m /= static_cast<double>(config.n_seeds);
  return mean;
}

}  // namespace rbi
