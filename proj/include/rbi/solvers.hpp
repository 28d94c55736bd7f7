#pragma once

// Exact non-parametric maximizers of the improvement step sum_a pi(a) A(a)
// under the reroute, total-variation, PPO and forward-KL constraints, plus a
// vertex-enumeration LP oracle for the reroute program.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbi/prob.hpp"

namespace rbi {

namespace detail {

inline void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
  if (a == 0) throw std::invalid_argument(std::string(what) + ": empty action set");
}

// Indices sorted by advantage, descending; equal advantages keep the lower index first.
inline std::vector<std::size_t> order_descending(std::span<const double> adv) {
  std::vector<std::size_t> idx(adv.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return adv[a] > adv[b]; });
  return idx;
}

// Indices sorted by advantage, ascending; equal advantages keep the lower index first.
inline std::vector<std::size_t> order_ascending(std::span<const double> adv) {
  std::vector<std::size_t> idx(adv.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return adv[a] < adv[b]; });
  return idx;
}

inline ProbVector finish(std::vector<double> pi) {
  for (double& p : pi) p = std::max(p, 0.0);
  return ProbVector(std::move(pi));
}

}  // namespace detail

/// Index of the largest advantage; ties go to the lowest index.
inline std::size_t argmax_advantage(std::span<const double> adv) {
  if (adv.empty()) throw std::invalid_argument("argmax: empty action set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < adv.size(); ++i) {
    if (adv[i] > adv[best]) best = i;
  }
  return best;
}

/// Subtracts the beta-weighted mean so that sum_i beta_i A_i = 0.
inline AdvantageVector center_advantage(const ProbVector& beta, std::span<const double> q) {
  detail::check_lengths(beta.size(), q.size(), "center_advantage");
  double baseline = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) baseline += beta[i] * q[i];
  std::vector<double> adv(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) adv[i] = q[i] - baseline;
  return AdvantageVector(std::move(adv));
}

/// Max-Reroute. Start every action at c_min * beta and hand the remaining
/// mass out in descending advantage order, each action taking at most
/// (c_max - c_min) * beta.
inline ProbVector max_reroute(const ProbVector& beta, const AdvantageVector& adv, const RerouteParams& params) {
  detail::check_lengths(beta.size(), adv.size(), "max_reroute");
  const std::size_t n = beta.size();
  std::vector<double> pi(n);
  double assigned = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pi[i] = params.c_min * beta[i];
    assigned += pi[i];
  }
  double remaining = 1.0 - assigned;
  for (std::size_t a : detail::order_descending(adv.values())) {
    if (remaining <= 0.0) break;
    const double take = std::min(remaining, (params.c_max - params.c_min) * beta[a]);
    pi[a] += take;
    remaining -= take;
  }
  return detail::finish(std::move(pi));
}

/// Max-TV. Move min(delta, 1 - beta(a*)) onto the best action a*, taking it
/// from the other actions in ascending advantage order.
inline ProbVector max_tv(const ProbVector& beta, const AdvantageVector& adv, double delta) {
  detail::check_lengths(beta.size(), adv.size(), "max_tv");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("max_tv: delta must lie in (0, 1]");
  const std::size_t best = argmax_advantage(adv.values());
  std::vector<double> pi(beta.begin(), beta.end());
  double moved = std::min(delta, 1.0 - beta[best]);
  if (moved <= 0.0) return ProbVector(std::move(pi));
  pi[best] += moved;
  // The other actions hold exactly 1 - beta(a*) >= moved, so a* itself is never drained.
  for (std::size_t a : detail::order_ascending(adv.values())) {
    if (moved <= 0.0) break;
    if (a == best) continue;
    const double take = std::min(moved, beta[a]);
    pi[a] -= take;
    moved -= take;
  }
  return detail::finish(std::move(pi));
}

/// Ad hoc PPO maximization: drop non-positive advantage actions, fill positive
/// ones to (1 + epsilon) * beta in descending order, give any leftover to the
/// global argmax.
inline ProbVector max_ppo(const ProbVector& beta, const AdvantageVector& adv, double epsilon) {
  detail::check_lengths(beta.size(), adv.size(), "max_ppo");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("max_ppo: epsilon must be > 0");
  std::vector<double> pi(beta.size(), 0.0);
  double remaining = 1.0;
  for (std::size_t a : detail::order_descending(adv.values())) {
    if (remaining <= 0.0 || adv[a] <= 0.0) break;
    const double take = std::min(remaining, (1.0 + epsilon) * beta[a]);
    pi[a] += take;
    remaining -= take;
  }
  if (remaining > 0.0) pi[argmax_advantage(adv.values())] += remaining;
  return detail::finish(std::move(pi));
}

/// pi_i proportional to beta_i * exp(A_i / lambda). Advantages are shifted by
/// their maximum over the support of beta before exponentiation.
inline ProbVector max_forward_kl(const ProbVector& beta, const AdvantageVector& adv, double lambda) {
  detail::check_lengths(beta.size(), adv.size(), "max_forward_kl");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("max_forward_kl: lambda must be > 0");
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i] > 0.0) shift = std::max(shift, adv[i]);
  }
  std::vector<double> pi(beta.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i] > 0.0) {
      pi[i] = beta[i] * std::exp((adv[i] - shift) / lambda);
      z += pi[i];
    }
  }
  for (double& p : pi) p /= z;
  return ProbVector(std::move(pi));
}

/// One-hot on the highest advantage (lowest index on ties).
inline ProbVector greedy_step(const ProbVector& beta, const AdvantageVector& adv) {
  detail::check_lengths(beta.size(), adv.size(), "greedy_step");
  return ProbVector::one_hot(adv.size(), argmax_advantage(adv.values()));
}

/// Solves the reroute linear program by enumerating every vertex of the
/// polytope {c_min*beta <= pi <= c_max*beta, sum pi = 1}. A vertex has all but
/// one coordinate on a bound; the remaining "slack" coordinate is fixed by
/// the simplex equality. Cost is O(n * 2^(n-1)).
inline ProbVector lp_oracle(const ProbVector& beta, const AdvantageVector& adv, const RerouteParams& params) {
  detail::check_lengths(beta.size(), adv.size(), "lp_oracle");
  const std::size_t n = beta.size();
  if (n > 24) throw std::invalid_argument("lp_oracle: too many actions for vertex enumeration");
  constexpr double kFeasTol = 1e-10;

  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = params.c_min * beta[i];
    hi[i] = params.c_max * beta[i];
  }

  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> best;
  std::vector<double> cur(n);
  for (std::size_t slack = 0; slack < n; ++slack) {
    // Others index the non-slack coordinates; walk their {lo, hi} assignments
    // in Gray-code order so each step flips one coordinate.
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != slack) others.push_back(i);
    }
    double mass = 0.0;
    double value = 0.0;
    for (std::size_t i : others) {
      cur[i] = lo[i];
      mass += lo[i];
      value += lo[i] * adv[i];
    }
    const std::uint64_t count = std::uint64_t{1} << others.size();
    for (std::uint64_t k = 0; k < count; ++k) {
      if (k > 0) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(k));
        const std::size_t i = others[bit];
        const double next = (cur[i] == lo[i]) ? hi[i] : lo[i];
        mass += next - cur[i];
        value += (next - cur[i]) * adv[i];
        cur[i] = next;
      }
      const double slack_value = 1.0 - mass;
      if (slack_value < lo[slack] - kFeasTol || slack_value > hi[slack] + kFeasTol) continue;
      const double objective = value + slack_value * adv[slack];
      if (objective > best_value) {
        best_value = objective;
        best = cur;
        best[slack] = slack_value;
      }
    }
  }
  if (best.empty()) throw std::invalid_argument("lp_oracle: no feasible vertex");
  return detail::finish(std::move(best));
}

/// sum_i pi_i A_i. The advantage must be centered under beta.
inline double improvement_step(const ProbVector& pi, const ProbVector& beta, const AdvantageVector& adv) {
  detail::check_lengths(pi.size(), adv.size(), "improvement_step");
  detail::check_lengths(beta.size(), adv.size(), "improvement_step");
  double centered = 0.0;
  double scale = 1.0;
  double value = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    centered += beta[i] * adv[i];
    scale = std::max(scale, std::abs(adv[i]));
    value += pi[i] * adv[i];
  }
  if (std::abs(centered) > 1e-6 * scale) {
    throw std::invalid_argument("improvement_step: advantage is not centered under beta");
  }
  return value;
}

/// Half the L1 distance.
inline double tv_distance(const ProbVector& p, const ProbVector& q) {
  detail::check_lengths(p.size(), q.size(), "tv_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

/// Radius of the smallest TV ball guaranteed to contain every reroute of beta.
inline double reroute_tv_bound(const RerouteParams& params) {
  return std::min(1.0 - params.c_min, std::max((params.c_max - 1.0) / 2.0, (1.0 - params.c_min) / 2.0));
}

/// Checks the rank condition: for any two actions in the support of beta,
/// a strictly larger advantage never gets a strictly smaller ratio pi/beta.
inline bool rank_monotone(const ProbVector& pi, const ProbVector& beta, const AdvantageVector& adv,
                          double tol = 1e-12) {
  detail::check_lengths(pi.size(), adv.size(), "rank_monotone");
  const std::size_t n = adv.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (beta[i] <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (beta[j] <= 0.0 || !(adv[j] > adv[i])) continue;
      if (pi[j] / beta[j] < pi[i] / beta[i] - tol) return false;
    }
  }
  return true;
}

/// Dispatches to the maximizer matching the constraint kind.
inline ProbVector solve(const ConstraintSpec& spec, const ProbVector& beta, const AdvantageVector& adv) {
  struct Visitor {
    const ProbVector& beta;
    const AdvantageVector& adv;
    ProbVector operator()(const constraint::Reroute& c) const { return max_reroute(beta, adv, c.params); }
    ProbVector operator()(const constraint::Tv& c) const { return max_tv(beta, adv, c.delta); }
    ProbVector operator()(const constraint::Ppo& c) const { return max_ppo(beta, adv, c.epsilon); }
    ProbVector operator()(const constraint::ForwardKl& c) const { return max_forward_kl(beta, adv, c.lambda); }
    ProbVector operator()(const constraint::Greedy&) const { return greedy_step(beta, adv); }
  };
  return std::visit(Visitor{beta, adv}, spec);
}

}  // namespace rbi
