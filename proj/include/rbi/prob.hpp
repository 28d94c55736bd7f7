#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rbi {

/// Tolerance on |sum - 1| for a distribution to be accepted.
inline constexpr double kSimplexTolerance = 1e-8;

/// Discrete distribution over actions. Construction validates; an invalid
/// distribution is rejected rather than renormalized.
class ProbVector {
 public:
  ProbVector() = default;

  explicit ProbVector(std::vector<double> probs) : probs_(std::move(probs)) { validate(); }
  ProbVector(std::initializer_list<double> probs) : probs_(probs) { validate(); }

  static ProbVector uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("ProbVector: empty action set");
    return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static ProbVector one_hot(std::size_t n, std::size_t index) {
    if (index >= n) throw std::invalid_argument("ProbVector: one-hot index out of range");
    std::vector<double> p(n, 0.0);
    p[index] = 1.0;
    return ProbVector(std::move(p));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const noexcept { return probs_; }
  const std::vector<double>& vec() const noexcept { return probs_; }
  auto begin() const noexcept { return probs_.begin(); }
  auto end() const noexcept { return probs_.end(); }

  bool operator==(const ProbVector&) const = default;

 private:
  void validate() const {
    if (probs_.empty()) throw std::invalid_argument("ProbVector: empty action set");
    double sum = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0) {
        throw std::invalid_argument("ProbVector: entries must be finite and >= 0");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "ProbVector: entries must sum to 1 (got " << sum << ")";
      throw std::invalid_argument(msg.str());
    }
  }

  std::vector<double> probs_;
};

/// Per-action advantage estimates (reward units).
class AdvantageVector {
 public:
  AdvantageVector() = default;
  explicit AdvantageVector(std::vector<double> values) : values_(std::move(values)) { validate(); }
  AdvantageVector(std::initializer_list<double> values) : values_(values) { validate(); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }

 private:
  void validate() const {
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("AdvantageVector: entries must be finite");
    }
  }

  std::vector<double> values_;
};

/// Box on the probability ratio pi/beta. Feasible only when c_min <= 1 <= c_max,
/// so that beta itself lies inside the box.
struct RerouteParams {
  double c_min = 1.0;
  double c_max = 1.0;

  RerouteParams() = default;
  RerouteParams(double lo, double hi) : c_min(lo), c_max(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || lo > hi) {
      throw std::invalid_argument("RerouteParams: need 0 <= c_min <= c_max");
    }
    if (lo > 1.0 || hi < 1.0) {
      throw std::invalid_argument("RerouteParams: infeasible, need c_min <= 1 <= c_max");
    }
  }

  bool operator==(const RerouteParams&) const = default;
};

namespace constraint {

struct Reroute {
  RerouteParams params;
};

struct Tv {
  double delta;
};

struct Ppo {
  double epsilon;
};

struct ForwardKl {
  double lambda;
};

struct Greedy {};

}  // namespace constraint

/// One improvement-step constraint family together with its parameter.
using ConstraintSpec =
    std::variant<constraint::Reroute, constraint::Tv, constraint::Ppo, constraint::ForwardKl, constraint::Greedy>;

inline ConstraintSpec make_reroute(double c_min, double c_max) {
  return constraint::Reroute{RerouteParams(c_min, c_max)};
}

inline ConstraintSpec make_tv(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("tv: delta must lie in (0, 1]");
  return constraint::Tv{delta};
}

inline ConstraintSpec make_ppo(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("ppo: epsilon must be > 0");
  return constraint::Ppo{epsilon};
}

inline ConstraintSpec make_forward_kl(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("forward_kl: lambda must be > 0");
  return constraint::ForwardKl{lambda};
}

inline ConstraintSpec make_greedy() { return constraint::Greedy{}; }

/// "reroute", "tv", "ppo", "forward_kl" or "greedy".
inline std::string kind_name(const ConstraintSpec& spec) {
  struct Visitor {
    std::string operator()(const constraint::Reroute&) const { return "reroute"; }
    std::string operator()(const constraint::Tv&) const { return "tv"; }
    std::string operator()(const constraint::Ppo&) const { return "ppo"; }
    std::string operator()(const constraint::ForwardKl&) const { return "forward_kl"; }
    std::string operator()(const constraint::Greedy&) const { return "greedy"; }
  };
  return std::visit(Visitor{}, spec);
}

/// Short label carrying the parameters, e.g. "reroute(0.5,1.5)".
inline std::string label(const ConstraintSpec& spec) {
  std::ostringstream out;
  out << kind_name(spec);
  if (auto* r = std::get_if<constraint::Reroute>(&spec)) {
    out << '(' << r->params.c_min << ',' << r->params.c_max << ')';
  } else if (auto* t = std::get_if<constraint::Tv>(&spec)) {
    out << '(' << t->delta << ')';
  } else if (auto* p = std::get_if<constraint::Ppo>(&spec)) {
    out << '(' << p->epsilon << ')';
  } else if (auto* k = std::get_if<constraint::ForwardKl>(&spec)) {
    out << '(' << k->lambda << ')';
  }
  return out.str();
}

/// True when the step depends only on the ordering (and sign) of advantages.
inline bool is_rank_based(const ConstraintSpec& spec) {
  return !std::holds_alternative<constraint::ForwardKl>(spec);
}

}  // namespace rbi
