// Acceptance suite: evaluates every criterion at its stated tolerance and
// prints one [PASS]/[FAIL] line per criterion.
//
//   rbi_acceptance            report mode, exits 0 once every criterion ran
//   rbi_acceptance --strict   exits 1 if any criterion failed

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rbi/experiments.hpp"

using namespace rbi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double objective(const ProbVector& pi, const AdvantageVector& adv) {
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * adv[i];
  return s;
}

Outcome oracle_equivalence() {
  Engine rng = make_engine(101);
  double worst_gap = 0.0;
  std::size_t violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + uniform_index(rng, 15);
    const ProbVector beta = random_prob_vector(n, rng);
    std::vector<double> raw(n);
    for (double& a : raw) a = uniform(rng, -1.0, 1.0);
    const AdvantageVector adv = center_advantage(beta, raw);
    const RerouteParams box(uniform01(rng), 1.0 + 4.0 * uniform01(rng));
    const ProbVector pi = max_reroute(beta, adv, box);
    const ProbVector lp = lp_oracle(beta, adv, box);
    worst_gap = std::max(worst_gap, std::abs(objective(pi, adv) - objective(lp, adv)));
    double total = 0.0;
    bool ok = rank_monotone(pi, beta, adv);
    for (std::size_t i = 0; i < n; ++i) {
      total += pi[i];
      ok = ok && pi[i] >= box.c_min * beta[i] - 1e-12 && pi[i] <= box.c_max * beta[i] + 1e-12;
    }
    ok = ok && std::abs(total - 1.0) <= 1e-12;
    violations += ok ? 0 : 1;
  }
  return {worst_gap <= 1e-9 && violations == 0,
          fmt("max |objective gap| %.3g over 1000 instances, %zu invariant violations", worst_gap, violations)};
}

Outcome penalty_bound() {
  experiments::PenaltySuiteConfig c;
  c.n_trials = 200;
  c.max_states = 20;
  c.max_actions = 5;
  c.n_episodes = {30, 300, 3000};
  c.constraints = {make_reroute(0.5, 1.5), make_tv(0.25), make_greedy()};
  const auto rows = experiments::run_penalty_suite(c, 2);
  double worst = INFINITY;
  for (const auto& r : rows) worst = std::min(worst, r.margin());
  return {worst >= -1e-7, fmt("min over %zu rows of V_pi - V_beta + penalty = %.3g", rows.size(), worst)};
}

Outcome objective_gap_identity() {
  Engine rng = make_engine(303);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t ns = 2 + uniform_index(rng, 19);
    const std::size_t na = 2 + uniform_index(rng, 4);
    const TabularMDP mdp = random_mdp(ns, na, 0.9, 5000 + k);
    const PolicyTable pi = random_policy(ns, na, rng);
    const PolicyTable beta = random_policy(ns, na, rng);
    const std::size_t s0 = uniform_index(rng, ns);
    const ObjectiveGap g = objective_gap(mdp, pi, beta, s0);
    worst = std::max(worst, std::abs(g.value_difference - g.weighted_advantage));
  }
  return {worst <= 1e-7, fmt("max |difference| %.3g over 200 triples", worst)};
}

Outcome tv_subset() {
  Engine rng = make_engine(404);
  std::size_t violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = 2 + uniform_index(rng, 15);
    const ProbVector beta = random_prob_vector(n, rng);
    std::vector<double> raw(n);
    for (double& a : raw) a = uniform(rng, -1.0, 1.0);
    const RerouteParams box(uniform01(rng), 1.0 + 4.0 * uniform01(rng));
    const ProbVector pi = max_reroute(beta, center_advantage(beta, raw), box);
    violations += tv_distance(pi, beta) <= reroute_tv_bound(box) + 1e-12 ? 0 : 1;
  }
  const double bound = reroute_tv_bound(RerouteParams(0.5, 1.5));
  return {violations == 0 && bound == 0.25,
          fmt("%zu violations in 10000 instances, reroute_tv_bound(0.5,1.5) = %.17g", violations, bound)};
}

Outcome se_scaling() {
  const std::size_t n_actions = 8;
  const TabularMDP mdp = fan_out_mdp(n_actions, 40, 0.9, 505);
  PolicyTable beta = uniform_policy(mdp.n_states(), n_actions);
  std::vector<double> w(n_actions);
  for (std::size_t a = 0; a < n_actions; ++a) w[a] = std::pow(2.0, static_cast<double>(a));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  beta[0] = ProbVector(w);
  const McEstimate mc = mc_q_estimate(mdp, beta, 20000, default_horizon(0.9), 506);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t a = 0; a < n_actions; ++a) {
    const double x = std::log(mc.visits(0, a));
    const double y = std::log(mc.per_sa_se(0, a));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = static_cast<double>(n_actions);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {std::abs(slope + 0.5) <= 0.1, fmt("slope %.4f with 20000 episodes", slope)};
}

Outcome single_step_regret() {
  experiments::BanditRegretConfig c;
  c.bandit = GaussianBandit(-1.0, 1.0, 2.0, 2.0);
  c.constraints = {make_reroute(0.5, 1.5), make_greedy()};
  const auto rows = experiments::run_bandit_regret(c);
  double worst_rbi = INFINITY;
  bool crossover = false;
  for (const auto& r : rows) {
    if (std::holds_alternative<constraint::Reroute>(r.constraint)) worst_rbi = std::min(worst_rbi, r.regret_diff);
  }
  for (const auto& g : rows) {
    if (!std::holds_alternative<constraint::Greedy>(g.constraint) || g.n_samples != 10 || g.beta_a2 <= 0.5) continue;
    for (const auto& r : rows) {
      if (std::holds_alternative<constraint::Reroute>(r.constraint) && r.n_samples == 10 && r.beta_a2 == g.beta_a2 &&
          g.regret_diff < 0.0 && r.regret_diff >= 0.0) {
        crossover = true;
      }
    }
  }
  return {worst_rbi >= -1e-12 && crossover,
          fmt("min reroute diff %.4g; greedy < 0 <= reroute at some beta(a2) > 0.5, N=10: %s", worst_rbi,
              crossover ? "yes" : "no")};
}

Outcome learning_curves() {
  using experiments::window_mean;
  BanditLearnConfig c;
  c.n_seeds = 200;
  c.horizon = 1000;
  c.lr_schedule = ConstantRate{0.01};
  const GaussianBandit hard(-1.0, 1.0, 0.5, 2.0);
  c.constraint = make_reroute(0.5, 1.5);
  const double rbi = window_mean(run_learning_curve(hard, c, 7), 500, 1000);
  c.constraint = make_greedy();
  const double greedy = window_mean(run_learning_curve(hard, c, 7), 500, 1000);

  const GaussianBandit easy(-1.0, 1.0, 2.0, 0.5);
  c.lr_schedule = InverseCount{};
  double worst_easy = 0.0;
  std::string worst_name;
  for (const ConstraintSpec& spec :
       {make_reroute(0.5, 1.5), make_greedy(), make_tv(0.25), make_ppo(0.5), make_forward_kl(1.0)}) {
    c.constraint = spec;
    const double m = window_mean(run_learning_curve(easy, c, 7), 901, 1000);
    if (m > worst_easy) worst_easy = m, worst_name = label(spec);
  }
  return {rbi < greedy && worst_easy < 0.3,
          fmt("hard window 500-1000: reroute(0.5,1.5) %.4f vs greedy %.4f; easy final-100 worst %.4f (%s)", rbi,
              greedy, worst_easy, worst_name.c_str())};
}

Outcome gradient_check() {
  using namespace rbi::harness;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    Engine rng = make_engine(808, k);
    const std::size_t ns = 2 + uniform_index(rng, 3), na = 2 + uniform_index(rng, 3), m = 1 + uniform_index(rng, 8);
    SoftmaxPolicyTable policy(ns, na);
    QTable qtable(ns, na);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        policy.logits(s, a) = uniform(rng, -2.0, 2.0);
        qtable.q(s, a) = uniform(rng, -1.0, 1.0);
      }
    }
    std::vector<LearnerSample> batch(m);
    for (auto& x : batch) {
      x.entry.state = uniform_index(rng, ns);
      x.entry.action = uniform_index(rng, na);
      x.entry.pi = random_prob_vector(na, rng);
      x.target = uniform(rng, -1.0, 1.0);
    }
    const std::vector<double> w = batch_weights(batch, policy, qtable, HarnessConfig{});
    const LossGradients g = loss_gradients(batch, w, policy, qtable);
    const double h = 1e-5;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        SoftmaxPolicyTable up = policy, down = policy;
        up.logits(s, a) += h;
        down.logits(s, a) -= h;
        const double fd_kl = (loss_gradients(batch, w, up, qtable).loss.kl_loss -
                              loss_gradients(batch, w, down, qtable).loss.kl_loss) /
                             (2 * h);
        QTable qu = qtable, qd = qtable;
        qu.q(s, a) += h;
        qd.q(s, a) -= h;
        const double fd_q =
            (loss_gradients(batch, w, policy, qu).loss.q_loss - loss_gradients(batch, w, policy, qd).loss.q_loss) /
            (2 * h);
        worst = std::max({worst, rel(fd_kl, g.logits(s, a)), rel(fd_q, g.q(s, a))});
      }
    }
  }
  return {worst <= 1e-6, fmt("max relative error %.3g over 50 instances", worst)};
}

Outcome harness_end_to_end() {
  using namespace rbi::harness;
  const GridWorld env;
  const double optimum = value_iteration(env.to_mdp(0.95)).v[env.start()];
  HarnessConfig c;
  c.env_step_budget = 200000;
  c.n_actors = 4;
  c.schedule = ScheduleMode::concurrent;
  const TrainingReport r = run_training(env, c, 909);
  const double ratio = r.final_greedy_return / optimum;

  HarnessConfig id = c;
  id.c_min = id.c_max = 1.0;
  id.c_greedy = 0.0;
  id.env_step_budget = 50000;
  const TrainingReport ri = run_training(env, id, 910);
  bool unchanged = true;
  for (double v : ri.policy.logits.data()) unchanged = unchanged && v == 0.0;
  return {ratio >= 0.95 && unchanged,
          fmt("greedy return %.5f vs optimum %.5f (%.2f%%), identity config logits unchanged: %s",
              r.final_greedy_return, optimum, 100.0 * ratio, unchanged ? "yes" : "no")};
}

Outcome determinism() {
  using namespace rbi::harness;
  HarnessConfig c;
  c.env_step_budget = 40000;
  c.schedule = ScheduleMode::deterministic;
  const std::string t1 = experiments::train_csv(run_training(GridWorld{}, c, 1010));
  const std::string t2 = experiments::train_csv(run_training(GridWorld{}, c, 1010));

  const std::string r1 = experiments::regret_csv(experiments::run_bandit_regret({}));
  const std::string r2 = experiments::regret_csv(experiments::run_bandit_regret({}));

  experiments::PenaltySuiteConfig p;
  p.n_trials = 20;
  const std::string p1 = experiments::penalty_csv(experiments::run_penalty_suite(p, 1011));
  const std::string p2 = experiments::penalty_csv(experiments::run_penalty_suite(p, 1011));

  experiments::BanditLearnExperiment l;
  l.base.n_seeds = 20;
  l.base.horizon = 200;
  const std::string l1 = experiments::curve_csv(experiments::run_bandit_learn(l, 1012));
  const std::string l2 = experiments::curve_csv(experiments::run_bandit_learn(l, 1012));

  const bool same = t1 == t2 && r1 == r2 && p1 == p2 && l1 == l2;
  return {same, fmt("train %s, bandit-regret %s, penalty-suite %s, bandit-learn %s", t1 == t2 ? "identical" : "DIFFER",
                    r1 == r2 ? "identical" : "DIFFER", p1 == p2 ? "identical" : "DIFFER",
                    l1 == l2 ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<Criterion> criteria{
      {1, "Oracle equivalence", 5, oracle_equivalence},
      {2, "Improvement-penalty bound", 60, penalty_bound},
      {3, "Objective-gap identity", 30, objective_gap_identity},
      {4, "TV subset", 0, tv_subset},
      {5, "SE scaling", 60, se_scaling},
      {6, "Single-step regret", 1, single_step_regret},
      {7, "Learning curves", 120, learning_curves},
      {8, "Gradient checks", 0, gradient_check},
      {9, "Harness end-to-end", 300, harness_end_to_end},
      {10, "Determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds <= 0.0 || dt < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    const std::string limit = c.limit_seconds > 0.0 ? fmt(", limit %.0f s", c.limit_seconds) : "";
    std::printf("[%s] %d. %s: %s (%.2f s%s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt,
                limit.c_str(), in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d passed, %d failed\n", criteria.size(), static_cast<int>(criteria.size()) - failed,
              failed);
  return strict && failed > 0 ? 1 : 0;
}
