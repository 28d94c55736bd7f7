#pragma once

// Actor/learner training loop. Actors act with the non-parametric RBI policy
// computed from the latest snapshot they loaded, and hand finished episodes
// to the replay buffer. The learner imitates the stored policies with a
// weighted KL loss, regresses Q on n-step targets, publishes snapshots and
// refreshes its target table on fixed batch cadences.

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rbi/cancel.hpp"
#include "rbi/harness/gridworld.hpp"
#include "rbi/harness/learning.hpp"
#include "rbi/harness/replay.hpp"
#include "rbi/mdp.hpp"
#include "rbi/random.hpp"

namespace rbi::harness {

struct TrainingRow {
  std::size_t wall_step = 0;
  std::size_t env_steps = 0;
  std::size_t batches = 0;
  double eval_return = 0.0;
  double kl_loss = 0.0;
  double q_loss = 0.0;
  std::size_t buffer_size = 0;
};

struct TrainingOptions {
  /// Copy the replay buffer into the report.
  bool keep_replay = false;
  /// Keep every published snapshot in the report, keyed by sequence number.
  bool keep_snapshots = false;
  /// When set, every published snapshot is also written here.
  std::filesystem::path snapshot_dir;
};

struct TrainingReport {
  std::vector<TrainingRow> rows;
  SoftmaxPolicyTable policy;
  QTable qtable;
  /// Exact value at the start state of the exploration-free actor policy.
  double final_eval_return = 0.0;
  /// Exact value at the start state of argmax pi_theta.
  double final_greedy_return = 0.0;
  std::size_t env_steps = 0;
  std::size_t batches = 0;
  std::uint64_t snapshots_published = 0;
  std::vector<std::size_t> entries_per_actor;
  std::size_t entries_inserted = 0;
  bool snapshots_monotone = true;
  std::vector<Episode> replay;
  std::map<std::uint64_t, Snapshot> snapshots;
};

/// The exploration-free policy actors would store for every state.
inline PolicyTable stored_policy(const StateActionValues& logits, const StateActionValues& q,
                                 const HarnessConfig& config) {
  PolicyTable out;
  out.reserve(logits.n_states());
  for (std::size_t s = 0; s < logits.n_states(); ++s) {
    out.push_back(actor_policy(SoftmaxPolicyTable::softmax(logits.row(s)), q.row(s), config, 0.0).stored);
  }
  return out;
}

inline PolicyTable argmax_policy(const SoftmaxPolicyTable& policy) {
  PolicyTable out;
  out.reserve(policy.n_states());
  for (std::size_t s = 0; s < policy.n_states(); ++s) {
    out.push_back(ProbVector::one_hot(policy.n_actions(), argmax_advantage(policy.logits.row(s))));
  }
  return out;
}

namespace detail {

class Actor {
 public:
  Actor(std::size_t id, const GridWorld& env, const HarnessConfig& config, std::uint64_t seed,
        const SnapshotStore& store, ReplayBuffer& buffer)
      : id_(id),
        env_(env),
        config_(config),
        epsilon_(config.epsilon_for(id)),
        rng_(make_engine(seed, 0x41000000ULL + id)),
        store_(store),
        buffer_(buffer),
        state_(env.start()) {}

  void step() {
    if (!snapshot_ || since_reload_ >= config_.actor_reload_every_steps) reload();
    const ProbVector pi_hat = SoftmaxPolicyTable::softmax(snapshot_->logits.row(state_));
    const auto q_row = snapshot_->q.row(state_);
    const ActorPolicy policy = actor_policy(pi_hat, q_row, config_, epsilon_);
    const std::size_t action = sample_categorical(policy.executed.values(), rng_);
    const GridWorld::Step out = env_.step(state_, action, rng_);

    ReplayEntry e;
    e.state = state_;
    e.action = action;
    e.pi = policy.stored;
    e.reward = out.reward;
    e.actor = id_;
    e.episode = episode_;
    e.step_index = current_.entries.size();
    e.snapshot_seq = snapshot_->seq;
    current_.entries.push_back(std::move(e));
    values_.push_back(QTable::value(q_row, pi_hat));

    ++since_reload_;
    state_ = out.next;
    if (out.terminal || current_.entries.size() >= env_.max_episode_steps) finish_episode(out.terminal);
  }

  std::size_t inserted() const { return inserted_; }
  bool monotone() const { return monotone_; }

 private:
  void reload() {
    auto latest = store_.latest();
    if (!latest) throw std::logic_error("actor: no snapshot published");
    if (snapshot_ && latest->seq < snapshot_->seq) {
      monotone_ = false;
      return;
    }
    snapshot_ = std::move(latest);
    since_reload_ = 0;
  }

  // Priority of entry i: |n-step return under the acting snapshot - V(s_i)|.
  void finish_episode(bool terminated) {
    current_.final_state = state_;
    current_.terminated = terminated;
    const std::size_t len = current_.entries.size();
    const double final_value =
        terminated ? 0.0
                   : QTable::value(snapshot_->q.row(state_), SoftmaxPolicyTable::softmax(snapshot_->logits.row(state_)));
    std::vector<double> window;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t end = std::min(len, i + config_.n_step);
      window.clear();
      for (std::size_t k = i; k < end; ++k) window.push_back(current_.entries[k].reward);
      const double boot = end < len ? values_[end] : final_value;
      const double ret = n_step_target(window, boot, config_.gamma, config_.n_step);
      current_.entries[i].priority = std::abs(ret - values_[i]);
    }
    inserted_ += len;
    buffer_.insert(std::move(current_));
    current_ = Episode{};
    values_.clear();
    ++episode_;
    state_ = env_.start();
  }

  std::size_t id_;
  const GridWorld& env_;
  const HarnessConfig& config_;
  double epsilon_;
  Engine rng_;
  const SnapshotStore& store_;
  ReplayBuffer& buffer_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::size_t since_reload_ = 0;
  std::size_t state_;
  std::uint64_t episode_ = 0;
  Episode current_;
  std::vector<double> values_;
  std::size_t inserted_ = 0;
  bool monotone_ = true;
};

class Learner {
 public:
  Learner(const GridWorld& env, const TabularMDP& mdp, const HarnessConfig& config, std::uint64_t seed,
          SnapshotStore& store, const ReplayBuffer& buffer, TrainingReport& report, const TrainingOptions& options)
      : env_(env),
        mdp_(mdp),
        config_(config),
        rng_(make_engine(seed, 0x4c000000ULL)),
        store_(store),
        buffer_(buffer),
        report_(report),
        options_(options),
        policy_(env.n_states(), GridWorld::kActions),
        qtable_(env.n_states(), GridWorld::kActions) {
    publish();
  }

  /// Runs one batch; false when the buffer is still empty.
  bool step() {
    const auto sampled =
        buffer_.sample(config_.batch_size, config_.n_step, rng_, config_.sampling, config_.priority_exponent);
    if (sampled.empty()) return false;
    std::vector<LearnerSample> batch;
    batch.reserve(sampled.size());
    for (const auto& t : sampled) {
      double boot = 0.0;
      if (t.bootstrap) boot = QTable::value(qtable_.target.row(t.bootstrap_state), policy_.row(t.bootstrap_state));
      batch.push_back({t.entry, n_step_target(t.rewards, boot, config_.gamma, config_.n_step)});
    }
    const LossReport loss = learner_step(batch, policy_, qtable_, config_);
    kl_sum_ += loss.kl_loss;
    q_sum_ += loss.q_loss;
    ++since_row_;
    ++batches_;
    if (batches_ % config_.snapshot_every_batches == 0) publish();
    if (batches_ % config_.target_update_every_batches == 0) qtable_.sync_target();
    return true;
  }

  std::size_t batches() const { return batches_; }

  void record(std::size_t env_steps) {
    TrainingRow row;
    row.wall_step = report_.rows.size();
    row.env_steps = env_steps;
    row.batches = batches_;
    row.eval_return = eval_return();
    row.kl_loss = since_row_ ? kl_sum_ / static_cast<double>(since_row_) : 0.0;
    row.q_loss = since_row_ ? q_sum_ / static_cast<double>(since_row_) : 0.0;
    row.buffer_size = buffer_.size();
    report_.rows.push_back(row);
    kl_sum_ = q_sum_ = 0.0;
    since_row_ = 0;
  }

  double eval_return() const {
    return evaluate_policy(mdp_, stored_policy(policy_.logits, qtable_.q, config_)).v[env_.start()];
  }

  double greedy_return() const { return evaluate_policy(mdp_, argmax_policy(policy_)).v[env_.start()]; }

  const SoftmaxPolicyTable& policy() const { return policy_; }
  const QTable& qtable() const { return qtable_; }

 private:
  void publish() {
    const std::uint64_t seq = store_.publish(policy_.logits, qtable_.q);
    report_.snapshots_published = seq;
    if (options_.keep_snapshots) report_.snapshots[seq] = *store_.latest();
  }

  const GridWorld& env_;
  const TabularMDP& mdp_;
  const HarnessConfig& config_;
  Engine rng_;
  SnapshotStore& store_;
  const ReplayBuffer& buffer_;
  TrainingReport& report_;
  const TrainingOptions& options_;
  SoftmaxPolicyTable policy_;
  QTable qtable_;
  std::size_t batches_ = 0;
  double kl_sum_ = 0.0;
  double q_sum_ = 0.0;
  std::size_t since_row_ = 0;
};

}  // namespace detail

/// Trains until config.env_step_budget environment steps have been taken and
/// the learner has run one batch per env_steps_per_batch of them. In
/// deterministic mode actors and learner interleave on one thread in a fixed
/// order (one step per actor, then every batch the pace allows), so a seed
/// reproduces the report exactly. In concurrent mode each actor and the
/// learner run on their own threads.
inline TrainingReport run_training(const GridWorld& env, const HarnessConfig& config, std::uint64_t seed,
                                   const TrainingOptions& options = {}) {
  env.validate();
  config.validate();
  const TabularMDP mdp = env.to_mdp(config.gamma);

  TrainingReport report;
  SnapshotStore store(options.snapshot_dir);
  ReplayBuffer buffer(config.replay_capacity);
  detail::Learner learner(env, mdp, config, seed, store, buffer, report, options);
  std::vector<std::unique_ptr<detail::Actor>> actors;
  for (std::size_t k = 0; k < config.n_actors; ++k) {
    actors.push_back(std::make_unique<detail::Actor>(k, env, config, seed, store, buffer));
  }

  const std::size_t budget = config.env_step_budget;
  auto learner_batch = [&](std::size_t env_steps) {
    if (!learner.step()) return false;
    if (learner.batches() % config.eval_every_batches == 0) learner.record(env_steps);
    return true;
  };

  learner.record(0);
  if (config.schedule == ScheduleMode::deterministic) {
    std::size_t env_steps = 0;
    while (env_steps < budget) {
      throw_if_cancelled();
      for (auto& actor : actors) {
        if (env_steps >= budget) break;
        actor->step();
        ++env_steps;
      }
      const std::size_t allowed = env_steps / config.env_steps_per_batch;
      while (learner.batches() < allowed && learner_batch(env_steps)) {
      }
    }
    report.env_steps = env_steps;
  } else {
    std::atomic<std::size_t> claimed{0};
    std::atomic<std::size_t> done_steps{0};
    std::atomic<std::size_t> batches{0};
    std::atomic<std::size_t> actors_running{actors.size()};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto fail = [&] {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      failed = true;
    };

    std::vector<std::thread> threads;
    for (auto& actor : actors) {
      threads.emplace_back([&, a = actor.get()] {
        try {
          for (;;) {
            if (failed || cancel_flag()) break;
            // Stay within max_actor_lead_batches of the learner once it has data to chew on.
            if (buffer.size() > 0 &&
                done_steps.load() > (batches.load() + config.max_actor_lead_batches) * config.env_steps_per_batch) {
              std::this_thread::sleep_for(std::chrono::microseconds(50));
              continue;
            }
            if (claimed.fetch_add(1) >= budget) break;
            a->step();
            ++done_steps;
          }
        } catch (...) {
          fail();
        }
        --actors_running;
      });
    }
    threads.emplace_back([&] {
      try {
        for (;;) {
          if (failed || cancel_flag()) break;
          const std::size_t steps = done_steps.load();
          const bool actors_done = actors_running.load() == 0;
          const std::size_t allowed = std::min(steps, budget) / config.env_steps_per_batch;
          if (learner.batches() < allowed && learner_batch(steps)) {
            batches = learner.batches();
            continue;
          }
          if (actors_done) break;
          std::this_thread::sleep_for(std::chrono::microseconds(50));
        }
      } catch (...) {
        fail();
      }
    });
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
    throw_if_cancelled();
    report.env_steps = std::min(done_steps.load(), budget);
  }

  if (report.rows.back().batches != learner.batches() || report.rows.size() == 1) learner.record(report.env_steps);
  report.batches = learner.batches();
  report.policy = learner.policy();
  report.qtable = learner.qtable();
  report.final_eval_return = learner.eval_return();
  report.final_greedy_return = learner.greedy_return();
  for (const auto& actor : actors) {
    report.entries_per_actor.push_back(actor->inserted());
    report.snapshots_monotone = report.snapshots_monotone && actor->monotone();
  }
  report.entries_inserted = buffer.total_inserted();
  if (options.keep_replay) report.replay = buffer.episodes();
  return report;
}

}  // namespace rbi::harness
