#pragma once

// Tabular counterparts of the policy network and Q network, and the
// per-sample pieces of the actor and learner loops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rbi/mdp.hpp"
#include "rbi/prob.hpp"
#include "rbi/solvers.hpp"

namespace rbi::harness {

enum class SamplingMode { uniform, priority };
enum class ScheduleMode { deterministic, concurrent };

struct HarnessConfig {
  double c_min = 0.1;
  double c_max = 2.0;
  double c_greedy = 0.1;
  /// c_mix = m / (c_mix_offset + m) for m actions.
  double c_mix_offset = 43.7;
  double priority_exponent = 0.5;
  std::size_t batch_size = 128;
  std::size_t n_actors = 4;
  std::size_t n_step = 3;
  std::size_t snapshot_every_batches = 10;
  std::size_t actor_reload_every_steps = 100;
  std::size_t target_update_every_batches = 250;
  double learning_rate = 0.5;
  /// Actor k uses exploration_epsilon[k % size].
  std::vector<double> exploration_epsilon{0.01};
  double gamma = 0.95;
  std::size_t env_step_budget = 200000;
  /// Learner pace: one batch per this many environment steps.
  std::size_t env_steps_per_batch = 4;
  /// Actors pause when they are more than this many batches ahead of the learner.
  std::size_t max_actor_lead_batches = 50;
  std::size_t eval_every_batches = 500;
  std::size_t replay_capacity = 1000000;
  SamplingMode sampling = SamplingMode::uniform;
  ScheduleMode schedule = ScheduleMode::deterministic;

  double c_mix(std::size_t n_actions) const {
    const auto m = static_cast<double>(n_actions);
    return m / (c_mix_offset + m);
  }

  double epsilon_for(std::size_t actor) const { return exploration_epsilon[actor % exploration_epsilon.size()]; }

  RerouteParams reroute() const { return RerouteParams(c_min, c_max); }

  void validate() const {
    reroute();
    if (!(c_greedy >= 0.0 && c_greedy <= 1.0)) throw std::invalid_argument("HarnessConfig: c_greedy must lie in [0, 1]");
    if (!(c_mix_offset > 0.0)) throw std::invalid_argument("HarnessConfig: c_mix_offset must be > 0");
    if (!(priority_exponent >= 0.0)) throw std::invalid_argument("HarnessConfig: priority_exponent must be >= 0");
    if (batch_size == 0 || n_actors == 0 || n_step == 0) {
      throw std::invalid_argument("HarnessConfig: batch_size, n_actors and n_step must be >= 1");
    }
    if (snapshot_every_batches == 0 || actor_reload_every_steps == 0 || target_update_every_batches == 0 ||
        env_steps_per_batch == 0 || eval_every_batches == 0) {
      throw std::invalid_argument("HarnessConfig: cadences must be >= 1");
    }
    if (!(learning_rate > 0.0)) throw std::invalid_argument("HarnessConfig: learning_rate must be > 0");
    if (exploration_epsilon.empty()) throw std::invalid_argument("HarnessConfig: exploration_epsilon is empty");
    for (double e : exploration_epsilon) {
      if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("HarnessConfig: exploration_epsilon must lie in [0, 1]");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("HarnessConfig: gamma must lie in [0, 1)");
    if (env_step_budget == 0) throw std::invalid_argument("HarnessConfig: env_step_budget must be >= 1");
    if (replay_capacity < batch_size) throw std::invalid_argument("HarnessConfig: replay_capacity < batch_size");
  }
};

/// Learnable logits; the policy of state s is softmax(logits(s, .)).
struct SoftmaxPolicyTable {
  StateActionValues logits;

  SoftmaxPolicyTable() = default;
  SoftmaxPolicyTable(std::size_t n_states, std::size_t n_actions) : logits(n_states, n_actions, 0.0) {}
  explicit SoftmaxPolicyTable(StateActionValues l) : logits(std::move(l)) {}

  std::size_t n_states() const { return logits.n_states(); }
  std::size_t n_actions() const { return logits.n_actions(); }

  ProbVector row(std::size_t s) const { return softmax(logits.row(s)); }

  static ProbVector softmax(std::span<const double> z) {
    const double shift = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      p[i] = std::exp(z[i] - shift);
      sum += p[i];
    }
    for (double& v : p) v /= sum;
    return ProbVector(std::move(p));
  }

  PolicyTable policy() const {
    PolicyTable out;
    out.reserve(n_states());
    for (std::size_t s = 0; s < n_states(); ++s) out.push_back(row(s));
    return out;
  }
};

/// Learnable Q values plus the frozen target copy used for bootstrapping.
struct QTable {
  StateActionValues q;
  StateActionValues target;

  QTable() = default;
  QTable(std::size_t n_states, std::size_t n_actions) : q(n_states, n_actions, 0.0), target(n_states, n_actions, 0.0) {}

  void sync_target() { target = q; }

  static double value(std::span<const double> q_row, const ProbVector& pi) {
    double v = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) v += pi[a] * q_row[a];
    return v;
  }
};

/// One actor transition as stored in the replay buffer. `pi` is the actor's
/// exploration-free policy at `state`.
struct ReplayEntry {
  std::size_t state = 0;
  std::size_t action = 0;
  ProbVector pi;
  double reward = 0.0;
  double priority = 0.0;
  std::uint64_t actor = 0;
  std::uint64_t episode = 0;
  std::size_t step_index = 0;
  /// Sequence number of the snapshot the actor acted with.
  std::uint64_t snapshot_seq = 0;
};

struct ActorPolicy {
  ProbVector executed;
  ProbVector stored;
};

/// stored = (1 - c_greedy) MaxReroute(pi_hat, A) + c_greedy onehot(argmax A), with
/// A = q - sum pi_hat q; executed = (1 - epsilon) stored + epsilon uniform.
inline ActorPolicy actor_policy(const ProbVector& pi_hat, std::span<const double> q_row, const HarnessConfig& config,
                                double epsilon) {
  const AdvantageVector adv = center_advantage(pi_hat, q_row);
  const ProbVector rerouted = max_reroute(pi_hat, adv, config.reroute());
  const std::size_t best = argmax_advantage(adv.values());
  const std::size_t m = pi_hat.size();
  std::vector<double> stored(m), executed(m);
  for (std::size_t a = 0; a < m; ++a) {
    stored[a] = (1.0 - config.c_greedy) * rerouted[a] + config.c_greedy * (a == best ? 1.0 : 0.0);
  }
  for (std::size_t a = 0; a < m; ++a) {
    executed[a] = (1.0 - epsilon) * stored[a] + epsilon / static_cast<double>(m);
  }
  return {ProbVector(std::move(executed)), ProbVector(std::move(stored))};
}

/// Unnormalized loss weight ((sum_a pi_mix A^2 + 0.1) / (|v| + 0.1))^alpha with
/// pi_mix = (1 - c_mix) pi_theta + c_mix uniform.
inline double priority_weight(const ProbVector& pi_theta, std::span<const double> adv_row, double v,
                              const HarnessConfig& config) {
  if (adv_row.size() != pi_theta.size()) throw std::invalid_argument("priority_weight: length mismatch");
  const std::size_t m = pi_theta.size();
  const double c_mix = config.c_mix(m);
  double spread = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    const double mix = (1.0 - c_mix) * pi_theta[a] + c_mix / static_cast<double>(m);
    spread += mix * adv_row[a] * adv_row[a];
  }
  return std::pow((spread + 0.1) / (std::abs(v) + 0.1), config.priority_exponent);
}

/// R = sum_{t=1..k} gamma^t r_t + gamma^k v with k = rewards.size() <= n. A
/// full window has k = n; at a true terminal the caller passes v = 0.
inline double n_step_target(std::span<const double> rewards, double bootstrap_v, double gamma, std::size_t n) {
  if (n == 0) throw std::invalid_argument("n_step_target: n must be >= 1");
  if (rewards.empty()) throw std::invalid_argument("n_step_target: empty reward window");
  if (rewards.size() > n) throw std::invalid_argument("n_step_target: more rewards than n");
  double discount = 1.0;
  double total = 0.0;
  for (double r : rewards) {
    discount *= gamma;
    total += discount * r;
  }
  return total + discount * bootstrap_v;
}

/// A replay entry paired with its n-step target.
struct LearnerSample {
  ReplayEntry entry;
  double target = 0.0;
};

struct LossReport {
  double kl_loss = 0.0;
  double q_loss = 0.0;
};

struct LossGradients {
  LossReport loss;
  StateActionValues logits;
  StateActionValues q;
};

/// Priority weights of a batch, computed from the current tables and rescaled to mean 1.
inline std::vector<double> batch_weights(std::span<const LearnerSample> batch, const SoftmaxPolicyTable& policy,
                                         const QTable& qtable, const HarnessConfig& config) {
  std::vector<double> w(batch.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::size_t s = batch[i].entry.state;
    const ProbVector pi = policy.row(s);
    const auto q_row = qtable.q.row(s);
    const double v = QTable::value(q_row, pi);
    std::vector<double> adv(q_row.begin(), q_row.end());
    for (double& x : adv) x -= v;
    w[i] = priority_weight(pi, adv, v, config);
    sum += w[i];
  }
  const double mean = sum / static_cast<double>(batch.size());
  for (double& x : w) x /= mean;
  return w;
}

/// L_pi = (1/N) sum w_i KL(pi_i || softmax(theta_s)),  L_q = (1/N) sum w_i (R_i - q(s_i,a_i))^2,
/// and their gradients with the weights held fixed.
inline LossGradients loss_gradients(std::span<const LearnerSample> batch, std::span<const double> weights,
                                    const SoftmaxPolicyTable& policy, const QTable& qtable) {
  if (batch.empty()) throw std::invalid_argument("learner_step: empty batch");
  if (weights.size() != batch.size()) throw std::invalid_argument("learner_step: weight count mismatch");
  LossGradients g;
  g.logits = StateActionValues(policy.n_states(), policy.n_actions(), 0.0);
  g.q = StateActionValues(qtable.q.n_states(), qtable.q.n_actions(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ReplayEntry& e = batch[i].entry;
    const ProbVector model = policy.row(e.state);
    double kl = 0.0;
    for (std::size_t a = 0; a < model.size(); ++a) {
      if (e.pi[a] > 0.0) kl += e.pi[a] * (std::log(e.pi[a]) - std::log(model[a]));
      g.logits(e.state, a) += weights[i] * inv_n * (model[a] - e.pi[a]);
    }
    g.loss.kl_loss += weights[i] * inv_n * kl;

    const double err = batch[i].target - qtable.q(e.state, e.action);
    g.loss.q_loss += weights[i] * inv_n * err * err;
    g.q(e.state, e.action) += -2.0 * weights[i] * inv_n * err;
  }
  return g;
}

/// One plain gradient step on both tables. Returns the losses before the step.
inline LossReport learner_step(std::span<const LearnerSample> batch, SoftmaxPolicyTable& policy, QTable& qtable,
                               const HarnessConfig& config) {
  if (batch.empty()) throw std::invalid_argument("learner_step: empty batch");
  const std::vector<double> w = batch_weights(batch, policy, qtable, config);
  const LossGradients g = loss_gradients(batch, w, policy, qtable);
  for (std::size_t s = 0; s < policy.n_states(); ++s) {
    for (std::size_t a = 0; a < policy.n_actions(); ++a) {
      policy.logits(s, a) -= config.learning_rate * g.logits(s, a);
      qtable.q(s, a) -= config.learning_rate * g.q(s, a);
    }
  }
  return g.loss;
}

}  // namespace rbi::harness
