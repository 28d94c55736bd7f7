#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rbi/bandit.hpp"

using namespace rbi;

namespace {

const GaussianBandit kFig1(-1.0, 1.0, 2.0, 2.0);

double window_mean(const std::vector<double>& v, std::size_t from, std::size_t to) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to),
                         0.0) /
         static_cast<double>(to - from);
}

std::vector<double> beta_grid() {
  std::vector<double> out;
  for (int k = 1; k <= 19; ++k) out.push_back(0.05 * k);
  return out;
}

}  // namespace

TEST(GaussianBanditTest, Validates) {
  EXPECT_THROW(GaussianBandit(-1.0, 1.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(GaussianBandit(1.0, -1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(CleanEventTest, EqualMeansIsHalf) {
  EXPECT_DOUBLE_EQ(clean_event_prob(GaussianBandit(0.0, 0.0, 1.0, 3.0), {0.3, 0.7}, 20), 0.5);
}

TEST(CleanEventTest, PhiOfOne) {
  EXPECT_NEAR(clean_event_prob(kFig1, {0.5, 0.5}, 4), 0.841344746, 1e-9);
}

TEST(CleanEventTest, MatchesMonteCarlo) {
  // Two pulls per arm: r_hat_i ~ N(mu_i, sigma^2 / 2).
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z(0.0, 1.0);
  const int trials = 1000000;
  int clean = 0;
  for (int t = 0; t < trials; ++t) {
    const double r1 = -1.0 + 2.0 * (z(rng) + z(rng)) / 2.0;
    const double r2 = 1.0 + 2.0 * (z(rng) + z(rng)) / 2.0;
    if (r2 > r1) ++clean;
  }
  const double p = static_cast<double>(clean) / trials;
  EXPECT_NEAR(p, clean_event_prob(kFig1, {0.5, 0.5}, 4), 4.0 * std::sqrt(0.25 / trials));
}

TEST(CleanEventTest, ConsistentInN) {
  EXPECT_GT(clean_event_prob(kFig1, {0.5, 0.5}, 1e6), 1.0 - 1e-12);
}

TEST(CleanEventTest, RejectsZeroArm) {
  EXPECT_THROW(clean_event_prob(kFig1, {1.0, 0.0}, 10), std::invalid_argument);
  EXPECT_THROW(clean_event_prob(kFig1, {0.5, 0.5}, 0.5), std::invalid_argument);
  EXPECT_THROW(clean_event_prob(kFig1, {0.2, 0.3, 0.5}, 10), std::invalid_argument);
}

TEST(StepRegretTest, IdentityIsZero) {
  for (double b : beta_grid()) {
    EXPECT_EQ(step_regret_diff(kFig1, {1.0 - b, b}, 10, make_reroute(1.0, 1.0)), 0.0);
  }
}

TEST(StepRegretTest, ClosedFormValues) {
  // Reference values from scipy's normal CDF.
  EXPECT_NEAR(step_regret_diff(kFig1, {0.2, 0.8}, 50, make_greedy()), 0.39532226501895273, 1e-12);
  EXPECT_NEAR(step_regret_diff(kFig1, {0.2, 0.8}, 50, make_reroute(0.5, 1.5)), 0.1990644530037905, 1e-12);
  EXPECT_NEAR(step_regret_diff(kFig1, {0.05, 0.95}, 50, make_greedy()), -0.02329159799800884, 1e-12);
  EXPECT_NEAR(step_regret_diff(kFig1, {0.05, 0.95}, 50, make_reroute(0.5, 1.5)), 0.043835420100099595, 1e-12);
  EXPECT_NEAR(step_regret_diff(kFig1, {0.05, 0.95}, 10, make_greedy()), -0.3906958830600722, 1e-12);
  EXPECT_NEAR(step_regret_diff(kFig1, {0.05, 0.95}, 10, make_reroute(0.5, 1.5)), 0.025465205846996408, 1e-12);
}

TEST(StepRegretTest, GreedyFallsBelowRerouteNearTheOptimum) {
  const ProbVector beta{0.05, 0.95};
  EXPECT_LT(step_regret_diff(kFig1, beta, 50, make_greedy()), step_regret_diff(kFig1, beta, 50, make_reroute(0.5, 1.5)));
  // At beta(a2) = 0.8 with N = 50 the clean event is near certain and greedy still wins.
  EXPECT_GT(step_regret_diff(kFig1, {0.2, 0.8}, 50, make_greedy()),
            step_regret_diff(kFig1, {0.2, 0.8}, 50, make_reroute(0.5, 1.5)));
}

TEST(StepRegretTest, CertainCleanEvent) {
  const GaussianBandit sharp(-1.0, 1.0, 1e-9, 1e-9);
  const ProbVector beta{0.3, 0.7};
  EXPECT_NEAR(step_regret_diff(sharp, beta, 10, make_greedy()), 1.0 - sharp.value(beta), 1e-12);
}

TEST(StepRegretTest, RejectsForwardKl) {
  EXPECT_THROW(step_regret_diff(kFig1, {0.5, 0.5}, 10, make_forward_kl(1.0)), std::invalid_argument);
}

TEST(StepRegretTest, RerouteSafeOnFigureGrid) {
  for (double n : {10.0, 50.0, 200.0}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      const GaussianBandit bandit(-1.0, 1.0, sigma, sigma);
      for (double b : beta_grid()) {
        EXPECT_GE(step_regret_diff(bandit, {1.0 - b, b}, n, make_reroute(0.5, 1.5)), -1e-12)
            << "beta2=" << b << " N=" << n << " sigma=" << sigma;
      }
    }
  }
}

TEST(StepRegretTest, RerouteSafeForWideBoxes) {
  for (int i = 0; i <= 5; ++i) {
    for (int j = 15; j <= 20; ++j) {
      const ConstraintSpec spec = make_reroute(0.1 * i, 0.1 * j);
      for (double n : {10.0, 50.0, 200.0}) {
        for (double sigma : {0.5, 1.0, 2.0}) {
          const GaussianBandit bandit(-1.0, 1.0, sigma, sigma);
          for (double b : beta_grid()) {
            EXPECT_GE(step_regret_diff(bandit, {1.0 - b, b}, n, spec), -1e-12) << label(spec) << " beta2=" << b;
          }
        }
      }
    }
  }
}

TEST(StepRegretTest, NarrowUpperBoxCanBeUnsafe) {
  // With c_max close to 1 the gain under the clean event is capped below the
  // loss under the bad event when beta(a2) is small.
  EXPECT_LT(step_regret_diff(kFig1, {0.95, 0.05}, 10, make_reroute(0.5, 1.1)), 0.0);
}

TEST(StepRegretTest, GreedyCrossover) {
  bool found = false;
  for (double b : beta_grid()) {
    if (b <= 0.5) continue;
    const ProbVector beta{1.0 - b, b};
    if (step_regret_diff(kFig1, beta, 10, make_greedy()) < 0.0 &&
        step_regret_diff(kFig1, beta, 10, make_reroute(0.5, 1.5)) >= 0.0) {
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(ClipToFloorTest, Invariants) {
  const ProbVector pi = clip_to_floor({0.0, 1.0}, 1e-3);
  EXPECT_DOUBLE_EQ(pi[0], 1e-3);
  EXPECT_NEAR(pi[1], 1.0 - 1e-3, 1e-15);
  const ProbVector keep = clip_to_floor({0.3, 0.7}, 1e-3);
  EXPECT_EQ(keep, (ProbVector{0.3, 0.7}));
  const ProbVector three = clip_to_floor({0.0, 0.0005, 0.9995}, 0.01);
  for (double p : three) EXPECT_GE(p, 0.01);
  EXPECT_THROW(clip_to_floor({0.5, 0.5}, 0.5), std::invalid_argument);
}

TEST(MixExplorationTest, Formula) {
  const ProbVector beta = mix_exploration({0.0, 1.0}, 0.1);
  EXPECT_DOUBLE_EQ(beta[0], 0.05);
  EXPECT_DOUBLE_EQ(beta[1], 0.95);
}

TEST(LearnConfigTest, Validates) {
  BanditLearnConfig c;
  c.epsilon_explore = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.pi_floor = 0.6;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.lr_schedule = ConstantRate{0.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n_seeds = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(LearningCurveTest, NoiselessGreedyIdentifiesQuickly) {
  const GaussianBandit bandit(-1.0, 1.0, 1e-9, 1e-9);
  BanditLearnConfig c;
  c.epsilon_explore = 0.0;
  c.lr_schedule = ConstantRate{0.5};
  c.constraint = make_greedy();
  c.horizon = 40;
  c.n_seeds = 20;
  const auto curve = run_learning_curve(bandit, c, 1);
  for (std::size_t t = 20; t < curve.size(); ++t) EXPECT_LT(curve[t], 1e-2);
}

TEST(LearningCurveTest, EasyCaseAllPoliciesConverge) {
  const GaussianBandit bandit(-1.0, 1.0, 2.0, 0.5);
  for (const ConstraintSpec& spec :
       {make_reroute(0.5, 1.5), make_greedy(), make_tv(0.25), make_ppo(0.5), make_forward_kl(1.0)}) {
    BanditLearnConfig c;
    c.constraint = spec;
    c.n_seeds = 100;
    const auto curve = run_learning_curve(bandit, c, 7);
    EXPECT_LT(window_mean(curve, 900, 1000), 0.3) << label(spec);
  }
}

TEST(LearningCurveTest, HardCaseRerouteSettlesAtMixingFixedPoint) {
  // Constraining against the mixed behavior keeps pi(a1) >= c_min * beta(a1),
  // so beta(a1) = 0.9 pi(a1) + 0.05 settles at 1/11 and the regret at 2/11.
  const GaussianBandit bandit(-1.0, 1.0, 0.5, 2.0);
  BanditLearnConfig c;
  c.lr_schedule = ConstantRate{0.01};
  c.n_seeds = 100;
  c.constraint = make_reroute(0.5, 1.5);
  const auto rbi = run_learning_curve(bandit, c, 8);
  EXPECT_NEAR(window_mean(rbi, 500, 1000), 2.0 / 11.0, 1e-3);
  c.constraint = make_greedy();
  const auto greedy = run_learning_curve(bandit, c, 8);
  EXPECT_NEAR(window_mean(greedy, 500, 1000), 0.1018, 0.01);
}

TEST(LearningCurveTest, ConstraintHoldsBeforeClipping) {
  const GaussianBandit bandit(-1.0, 1.0, 1.0, 1.0);
  BanditLearnConfig c;
  c.horizon = 300;
  for (const ConstraintSpec& spec : {make_reroute(0.5, 1.5), make_tv(0.25)}) {
    c.constraint = spec;
    const BanditTrace trace = run_learning_replica(bandit, c, 3, 0, true);
    for (std::size_t t = 0; t < trace.unclipped.size(); ++t) {
      const ProbVector& beta = trace.behavior[t];
      const ProbVector& pi = trace.unclipped[t];
      if (std::holds_alternative<constraint::Reroute>(spec)) {
        for (std::size_t a = 0; a < 2; ++a) {
          EXPECT_GE(pi[a], 0.5 * beta[a] - 1e-12);
          EXPECT_LE(pi[a], 1.5 * beta[a] + 1e-12);
        }
      } else {
        EXPECT_LE(tv_distance(pi, beta), 0.25 + 1e-12);
      }
      if (t + 1 < trace.behavior.size()) {
        const ProbVector clipped = clip_to_floor(pi, c.pi_floor);
        EXPECT_EQ(trace.behavior[t + 1], mix_exploration(clipped, c.epsilon_explore));
        for (double p : clipped) EXPECT_GE(p, c.pi_floor);
      }
    }
  }
}

TEST(LearningCurveTest, ReplicaIndependence) {
  const GaussianBandit bandit(-1.0, 1.0, 1.0, 1.0);
  BanditLearnConfig c;
  c.horizon = 200;
  c.n_seeds = 5;
  const auto curve = run_learning_curve(bandit, c, 9);
  std::vector<double> manual(c.horizon, 0.0);
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto r = run_learning_replica(bandit, c, 9, k).regret;
    for (std::size_t t = 0; t < c.horizon; ++t) manual[t] += r[t];
  }
  for (std::size_t t = 0; t < c.horizon; ++t) EXPECT_DOUBLE_EQ(curve[t], manual[t] / 5.0);
}
