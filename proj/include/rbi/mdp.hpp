#pragma once

// Exact analytics on finite discounted MDPs: policy evaluation by dense
// linear solves, discounted state occupancy, the improvement penalty of a
// step taken against an estimated Q, and first-visit Monte-Carlo Q estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rbi/parallel.hpp"
#include "rbi/prob.hpp"
#include "rbi/random.hpp"
#include "rbi/solvers.hpp"

namespace rbi {

/// Dense (state, action) table stored row-major by state.
class StateActionValues {
 public:
  StateActionValues() = default;
  StateActionValues(std::size_t n_states, std::size_t n_actions, double fill = 0.0)
      : n_states_(n_states), n_actions_(n_actions), data_(n_states * n_actions, fill) {}
  StateActionValues(std::size_t n_states, std::size_t n_actions, std::vector<double> data)
      : n_states_(n_states), n_actions_(n_actions), data_(std::move(data)) {
    if (data_.size() != n_states_ * n_actions_) throw std::invalid_argument("StateActionValues: size mismatch");
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  double& operator()(std::size_t s, std::size_t a) { return data_[s * n_actions_ + a]; }
  double operator()(std::size_t s, std::size_t a) const { return data_[s * n_actions_ + a]; }

  std::span<const double> row(std::size_t s) const { return {data_.data() + s * n_actions_, n_actions_}; }
  std::span<double> row(std::size_t s) { return {data_.data() + s * n_actions_, n_actions_}; }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const StateActionValues&) const = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> data_;
};

/// One distribution over actions per state.
using PolicyTable = std::vector<ProbVector>;

inline PolicyTable uniform_policy(std::size_t n_states, std::size_t n_actions) {
  return PolicyTable(n_states, ProbVector::uniform(n_actions));
}

/// Finite MDP with kernel P(s'|s,a), reward r(s,a) and discount gamma < 1.
/// Terminal states are absorbing with zero reward; the constructor rewrites
/// their rows accordingly.
class TabularMDP {
 public:
  TabularMDP(std::size_t n_states, std::size_t n_actions, std::vector<double> transition, std::vector<double> reward,
             double gamma, std::vector<bool> terminal = {}, std::vector<double> initial = {})
      : n_states_(n_states),
        n_actions_(n_actions),
        transition_(std::move(transition)),
        reward_(std::move(reward)),
        gamma_(gamma),
        terminal_(std::move(terminal)),
        initial_(std::move(initial)) {
    if (n_states_ == 0 || n_actions_ == 0) throw std::invalid_argument("TabularMDP: empty state or action set");
    if (transition_.size() != n_states_ * n_actions_ * n_states_) {
      throw std::invalid_argument("TabularMDP: transition must have n_states*n_actions*n_states entries");
    }
    if (reward_.size() != n_states_ * n_actions_) {
      throw std::invalid_argument("TabularMDP: reward must have n_states*n_actions entries");
    }
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw std::invalid_argument("TabularMDP: gamma must lie in [0, 1)");
    if (terminal_.empty()) terminal_.assign(n_states_, false);
    if (terminal_.size() != n_states_) throw std::invalid_argument("TabularMDP: terminal flags size mismatch");

    for (std::size_t s = 0; s < n_states_; ++s) {
      if (!terminal_[s]) continue;
      for (std::size_t a = 0; a < n_actions_; ++a) {
        for (std::size_t t = 0; t < n_states_; ++t) transition_[index(s, a, t)] = (t == s) ? 1.0 : 0.0;
        reward_[s * n_actions_ + a] = 0.0;
      }
    }
    for (std::size_t s = 0; s < n_states_; ++s) {
      for (std::size_t a = 0; a < n_actions_; ++a) {
        double sum = 0.0;
        for (std::size_t t = 0; t < n_states_; ++t) {
          const double p = transition_[index(s, a, t)];
          if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("TabularMDP: negative transition probability");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-8) {
          throw std::invalid_argument("TabularMDP: transition row (" + std::to_string(s) + "," + std::to_string(a) +
                                      ") does not sum to 1");
        }
        if (!std::isfinite(reward_[s * n_actions_ + a])) throw std::invalid_argument("TabularMDP: non-finite reward");
      }
    }

    if (initial_.empty()) {
      initial_.assign(n_states_, 0.0);
      std::size_t live = 0;
      for (std::size_t s = 0; s < n_states_; ++s) live += terminal_[s] ? 0 : 1;
      if (live == 0) throw std::invalid_argument("TabularMDP: every state is terminal");
      for (std::size_t s = 0; s < n_states_; ++s) initial_[s] = terminal_[s] ? 0.0 : 1.0 / static_cast<double>(live);
    }
    if (initial_.size() != n_states_) throw std::invalid_argument("TabularMDP: initial distribution size mismatch");
    ProbVector check(initial_);
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double gamma() const noexcept { return gamma_; }
  bool is_terminal(std::size_t s) const { return terminal_[s]; }
  std::span<const double> initial() const noexcept { return initial_; }

  double p(std::size_t s, std::size_t a, std::size_t next) const { return transition_[index(s, a, next)]; }
  double r(std::size_t s, std::size_t a) const { return reward_[s * n_actions_ + a]; }
  std::span<const double> next_row(std::size_t s, std::size_t a) const {
    return {transition_.data() + index(s, a, 0), n_states_};
  }

  double max_abs_reward() const {
    double m = 0.0;
    for (double v : reward_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t index(std::size_t s, std::size_t a, std::size_t t) const { return (s * n_actions_ + a) * n_states_ + t; }

  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  double gamma_;
  std::vector<bool> terminal_;
  std::vector<double> initial_;
};

/// V, Q and A = Q - V of one policy.
struct EvaluationResult {
  std::vector<double> v;
  StateActionValues q;
  StateActionValues a;
};

namespace detail {

inline void check_policy(const TabularMDP& mdp, const PolicyTable& pi, const char* what) {
  if (pi.size() != mdp.n_states()) throw std::invalid_argument(std::string(what) + ": policy has wrong state count");
  for (const auto& row : pi) {
    if (row.size() != mdp.n_actions()) throw std::invalid_argument(std::string(what) + ": policy has wrong action count");
  }
}

inline void check_table(const TabularMDP& mdp, const StateActionValues& t, const char* what) {
  if (t.n_states() != mdp.n_states() || t.n_actions() != mdp.n_actions()) {
    throw std::invalid_argument(std::string(what) + ": table dimensions do not match the MDP");
  }
}

inline void check_state(const TabularMDP& mdp, std::size_t s, const char* what) {
  if (s >= mdp.n_states()) throw std::invalid_argument(std::string(what) + ": state out of range");
}

// State-to-state kernel under pi.
inline Eigen::MatrixXd policy_kernel(const TabularMDP& mdp, const PolicyTable& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const double w = pi[s][a];
      if (w == 0.0) continue;
      const auto next = mdp.next_row(s, a);
      for (std::size_t t = 0; t < mdp.n_states(); ++t) p(s, t) += w * next[t];
    }
  }
  return p;
}

// LU factorization of I - gamma * P_pi.
inline Eigen::PartialPivLU<Eigen::MatrixXd> resolvent(const TabularMDP& mdp, const PolicyTable& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - mdp.gamma() * policy_kernel(mdp, pi);
  return Eigen::PartialPivLU<Eigen::MatrixXd>(m);
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

/// Q(s,a) = r(s,a) + gamma * sum_s' P(s'|s,a) V(s').
inline StateActionValues q_from_values(const TabularMDP& mdp, std::span<const double> v) {
  StateActionValues q(mdp.n_states(), mdp.n_actions());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const auto next = mdp.next_row(s, a);
      double ev = 0.0;
      for (std::size_t t = 0; t < mdp.n_states(); ++t) ev += next[t] * v[t];
      q(s, a) = mdp.r(s, a) + mdp.gamma() * ev;
    }
  }
  return q;
}

/// Exact V, Q, A of pi from v = r_pi + gamma * P_pi v.
inline EvaluationResult evaluate_policy(const TabularMDP& mdp, const PolicyTable& pi) {
  detail::check_policy(mdp, pi, "evaluate_policy");
  const std::size_t n = mdp.n_states();
  Eigen::VectorXd r_pi(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    double acc = 0.0;
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) acc += pi[s][a] * mdp.r(s, a);
    r_pi(static_cast<Eigen::Index>(s)) = acc;
  }
  const Eigen::MatrixXd kernel = detail::policy_kernel(mdp, pi);
  const Eigen::MatrixXd m =
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) - mdp.gamma() * kernel;
  const Eigen::VectorXd v = m.partialPivLu().solve(r_pi);

  const double residual = (v - (r_pi + mdp.gamma() * kernel * v)).lpNorm<Eigen::Infinity>();
  if (!(residual <= 1e-8 * std::max(1.0, v.lpNorm<Eigen::Infinity>()))) {
    throw std::runtime_error("evaluate_policy: linear solve failed (Bellman residual too large)");
  }

  EvaluationResult out;
  out.v = detail::from_eigen(v);
  out.q = q_from_values(mdp, out.v);
  out.a = StateActionValues(n, mdp.n_actions());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) out.a(s, a) = out.q(s, a) - out.v[s];
  }
  return out;
}

/// Row s0 of (I - gamma P_pi)^-1: the unnormalized discounted occupancy
/// sum_k gamma^k P(s0 -> s' in k steps | pi). Sums to 1 / (1 - gamma).
inline std::vector<double> discounted_state_distribution(const TabularMDP& mdp, const PolicyTable& pi,
                                                         std::size_t s0) {
  detail::check_policy(mdp, pi, "discounted_state_distribution");
  detail::check_state(mdp, s0, "discounted_state_distribution");
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - mdp.gamma() * detail::policy_kernel(mdp, pi);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(static_cast<Eigen::Index>(s0)) = 1.0;
  Eigen::VectorXd rho = m.transpose().partialPivLu().solve(e);
  return detail::from_eigen(rho);
}

/// Improvement penalty E(s) = sum_s' rho_pi(s'|s) sum_a eps(s',a) (beta - pi)(a|s')
/// for every start state s, where eps = Q_beta - Q_hat.
inline std::vector<double> improvement_penalty(const TabularMDP& mdp, const PolicyTable& beta, const PolicyTable& pi,
                                               const StateActionValues& eps) {
  detail::check_policy(mdp, beta, "improvement_penalty");
  detail::check_policy(mdp, pi, "improvement_penalty");
  detail::check_table(mdp, eps, "improvement_penalty");
  const std::size_t n = mdp.n_states();
  Eigen::VectorXd local(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    double acc = 0.0;
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) acc += eps(s, a) * (beta[s][a] - pi[s][a]);
    local(static_cast<Eigen::Index>(s)) = acc;
  }
  return detail::from_eigen(detail::resolvent(mdp, pi).solve(local));
}

/// The two sides of V_pi(s0) - V_beta(s0) = sum_s rho_pi(s|s0) sum_a pi(a|s) A_beta(s,a).
struct ObjectiveGap {
  double value_difference;
  double weighted_advantage;
};

inline ObjectiveGap objective_gap(const TabularMDP& mdp, const PolicyTable& pi, const PolicyTable& beta,
                                  std::size_t s0) {
  detail::check_policy(mdp, pi, "objective_gap");
  detail::check_policy(mdp, beta, "objective_gap");
  detail::check_state(mdp, s0, "objective_gap");
  const EvaluationResult eb = evaluate_policy(mdp, beta);
  const EvaluationResult ep = evaluate_policy(mdp, pi);
  const std::vector<double> rho = discounted_state_distribution(mdp, pi, s0);
  double weighted = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    double step = 0.0;
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) step += pi[s][a] * eb.a(s, a);
    weighted += rho[s] * step;
  }
  return {ep.v[s0] - eb.v[s0], weighted};
}

/// Optimal values by value iteration, stopped once the sup-norm change falls
/// below tol * (1 - gamma) / gamma.
struct OptimalSolution {
  std::vector<double> v;
  std::vector<std::size_t> greedy_action;
  std::size_t iterations = 0;
};

inline OptimalSolution value_iteration(const TabularMDP& mdp, double tol = 1e-12, std::size_t max_iter = 1000000) {
  const std::size_t n = mdp.n_states();
  std::vector<double> v(n, 0.0), next(n, 0.0);
  const double stop = mdp.gamma() > 0.0 ? tol * (1.0 - mdp.gamma()) / mdp.gamma() : tol;
  OptimalSolution out;
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    double delta = 0.0;
    const StateActionValues q = q_from_values(mdp, v);
    for (std::size_t s = 0; s < n; ++s) {
      const auto row = q.row(s);
      next[s] = *std::max_element(row.begin(), row.end());
      delta = std::max(delta, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (delta <= stop) break;
  }
  const StateActionValues q = q_from_values(mdp, v);
  out.greedy_action.resize(n);
  for (std::size_t s = 0; s < n; ++s) out.greedy_action[s] = argmax_advantage(q.row(s));
  out.v = std::move(v);
  return out;
}

/// First-visit Monte-Carlo estimate of Q_beta. Cells never visited carry
/// q_hat = NaN and visits = 0.
struct McEstimate {
  StateActionValues q_hat;
  StateActionValues visits;
  StateActionValues per_sa_se;
  /// Upper bound on the bias from truncating each return after `horizon` steps.
  double truncation_bound = 0.0;
};

/// Smallest horizon with gamma^horizon <= 1e-6.
inline std::size_t default_horizon(double gamma) {
  if (gamma <= 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(gamma)));
}

namespace detail {

struct CellStats {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }

  void merge(const CellStats& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }
};

}  // namespace detail

/// Episodes start from the MDP's initial distribution and follow beta until
/// a terminal state, or until `horizon` steps have passed since the last new
/// first visit, so every recorded return covers at least `horizon` rewards.
/// Each episode draws from its own stream derived from (seed, episode), and
/// statistics are reduced in fixed episode blocks, so the result does not
/// depend on the thread count.
inline McEstimate mc_q_estimate(const TabularMDP& mdp, const PolicyTable& beta, std::size_t n_episodes,
                                std::size_t horizon, std::uint64_t seed) {
  detail::check_policy(mdp, beta, "mc_q_estimate");
  if (n_episodes == 0) throw std::invalid_argument("mc_q_estimate: n_episodes must be >= 1");
  if (horizon == 0) throw std::invalid_argument("mc_q_estimate: horizon must be >= 1");
  if (std::pow(mdp.gamma(), static_cast<double>(horizon)) > 1e-6) {
    throw std::invalid_argument("mc_q_estimate: horizon too short (need gamma^horizon <= 1e-6)");
  }
  const std::size_t n_states = mdp.n_states();
  const std::size_t n_actions = mdp.n_actions();
  const std::size_t cells = n_states * n_actions;
  constexpr std::size_t kBlock = 256;
  const std::size_t n_blocks = (n_episodes + kBlock - 1) / kBlock;
  std::vector<std::vector<detail::CellStats>> blocks(n_blocks, std::vector<detail::CellStats>(cells));

  parallel_tasks(n_blocks, [&](std::size_t b) {
    auto& stats = blocks[b];
    std::vector<char> seen(cells);
    struct Visit {
      std::size_t t, cell;
    };
    std::vector<Visit> firsts;
    std::vector<double> rewards;
    const std::size_t end = std::min(n_episodes, (b + 1) * kBlock);
    for (std::size_t ep = b * kBlock; ep < end; ++ep) {
      Engine rng = make_engine(seed, ep);
      std::fill(seen.begin(), seen.end(), 0);
      firsts.clear();
      rewards.clear();
      std::size_t s = sample_categorical(mdp.initial(), rng);
      std::size_t last_first = 0;
      for (std::size_t t = 0; !mdp.is_terminal(s) && t < last_first + horizon; ++t) {
        const std::size_t a = sample_categorical(beta[s].values(), rng);
        const std::size_t cell = s * n_actions + a;
        if (!seen[cell]) {
          seen[cell] = 1;
          firsts.push_back({t, cell});
          last_first = t;
        }
        rewards.push_back(mdp.r(s, a));
        s = sample_categorical(mdp.next_row(s, a), rng);
      }
      // Discounted returns G_t, computed backwards.
      for (std::size_t k = rewards.size(); k-- > 1;) rewards[k - 1] += mdp.gamma() * rewards[k];
      for (const Visit& v : firsts) stats[v.cell].add(rewards[v.t]);
    }
  });

  std::vector<detail::CellStats> total(cells);
  for (const auto& block : blocks) {
    for (std::size_t c = 0; c < cells; ++c) total[c].merge(block[c]);
  }

  McEstimate out;
  out.q_hat = StateActionValues(n_states, n_actions, std::numeric_limits<double>::quiet_NaN());
  out.visits = StateActionValues(n_states, n_actions, 0.0);
  out.per_sa_se = StateActionValues(n_states, n_actions, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      const auto& c = total[s * n_actions + a];
      out.visits(s, a) = c.n;
      if (c.n > 0.0) out.q_hat(s, a) = c.mean;
      if (c.n > 1.0) out.per_sa_se(s, a) = std::sqrt(c.m2 / (c.n - 1.0) / c.n);
    }
  }
  out.truncation_bound =
      std::pow(mdp.gamma(), static_cast<double>(horizon)) * mdp.max_abs_reward() / (1.0 - mdp.gamma());
  return out;
}

/// Fills unvisited cells with the visit-weighted mean estimate of their state
/// (0 when the state was never visited), giving them a neutral advantage.
inline StateActionValues impute_missing(const McEstimate& mc) {
  StateActionValues q = mc.q_hat;
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    double weight = 0.0, acc = 0.0;
    for (std::size_t a = 0; a < q.n_actions(); ++a) {
      if (mc.visits(s, a) > 0.0) {
        weight += mc.visits(s, a);
        acc += mc.visits(s, a) * mc.q_hat(s, a);
      }
    }
    const double fill = weight > 0.0 ? acc / weight : 0.0;
    for (std::size_t a = 0; a < q.n_actions(); ++a) {
      if (!(mc.visits(s, a) > 0.0)) q(s, a) = fill;
    }
  }
  return q;
}

/// Per-state improvement step on A_hat = q_hat - sum_a beta q_hat.
inline PolicyTable apply_step(const TabularMDP& mdp, const PolicyTable& beta, const StateActionValues& q_hat,
                              const ConstraintSpec& spec) {
  detail::check_policy(mdp, beta, "apply_step");
  detail::check_table(mdp, q_hat, "apply_step");
  PolicyTable pi;
  pi.reserve(mdp.n_states());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (double v : q_hat.row(s)) {
      if (!std::isfinite(v)) throw std::invalid_argument("apply_step: q_hat has missing entries; impute first");
    }
    pi.push_back(solve(spec, beta[s], center_advantage(beta[s], q_hat.row(s))));
  }
  return pi;
}

inline PolicyTable apply_step(const TabularMDP& mdp, const PolicyTable& beta, const McEstimate& mc,
                              const ConstraintSpec& spec) {
  return apply_step(mdp, beta, impute_missing(mc), spec);
}

/// Random MDP: flat-Dirichlet transition rows, rewards uniform in [-1, 1].
/// Generator version 1; changing the draw order changes every golden value.
inline TabularMDP random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, std::uint64_t seed) {
  Engine rng = make_engine(seed, 0x4d4450);
  std::vector<double> transition;
  transition.reserve(n_states * n_actions * n_states);
  for (std::size_t i = 0; i < n_states * n_actions; ++i) {
    const auto row = dirichlet_flat(n_states, rng);
    transition.insert(transition.end(), row.begin(), row.end());
  }
  std::vector<double> reward(n_states * n_actions);
  for (double& r : reward) r = uniform(rng, -1.0, 1.0);
  return TabularMDP(n_states, n_actions, std::move(transition), std::move(reward), gamma);
}

inline PolicyTable random_policy(std::size_t n_states, std::size_t n_actions, Engine& rng) {
  PolicyTable pi;
  pi.reserve(n_states);
  for (std::size_t s = 0; s < n_states; ++s) pi.push_back(random_prob_vector(n_actions, rng));
  return pi;
}

/// Two-level tree: a root (state 0) whose every action leads uniformly to one
/// of `n_leaves` leaf states, each leaf moving to a terminal state. Every root
/// return has the same variance and no state repeats within an episode.
inline TabularMDP fan_out_mdp(std::size_t n_actions, std::size_t n_leaves, double gamma, std::uint64_t seed) {
  Engine rng = make_engine(seed, 0x545245);
  const std::size_t n_states = n_leaves + 2;
  const std::size_t terminal = n_leaves + 1;
  std::vector<double> transition(n_states * n_actions * n_states, 0.0);
  std::vector<double> reward(n_states * n_actions, 0.0);
  auto at = [&](std::size_t s, std::size_t a, std::size_t t) -> double& {
    return transition[(s * n_actions + a) * n_states + t];
  };
  for (std::size_t a = 0; a < n_actions; ++a) {
    for (std::size_t leaf = 1; leaf <= n_leaves; ++leaf) at(0, a, leaf) = 1.0 / static_cast<double>(n_leaves);
    reward[a] = uniform(rng, -1.0, 1.0);
  }
  for (std::size_t leaf = 1; leaf <= n_leaves; ++leaf) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      at(leaf, a, terminal) = 1.0;
      reward[leaf * n_actions + a] = uniform(rng, -1.0, 1.0);
    }
  }
  std::vector<bool> is_terminal(n_states, false);
  is_terminal[terminal] = true;
  std::vector<double> initial(n_states, 0.0);
  initial[0] = 1.0;
  return TabularMDP(n_states, n_actions, std::move(transition), std::move(reward), gamma, std::move(is_terminal),
                    std::move(initial));
}

}  // namespace rbi
