#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rbi/random.hpp"
#include "rbi/solvers.hpp"

using namespace rbi;

namespace {

void expect_probs(const ProbVector& got, std::vector<double> want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "entry " << i;
}

double objective(const ProbVector& pi, const AdvantageVector& adv) {
  double v = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) v += pi[i] * adv[i];
  return v;
}

struct Instance {
  ProbVector beta;
  AdvantageVector adv;
  RerouteParams params;
};

Instance random_instance(Engine& rng, std::size_t min_n = 2, std::size_t max_n = 16) {
  const std::size_t n = min_n + uniform_index(rng, max_n - min_n + 1);
  ProbVector beta = random_prob_vector(n, rng);
  std::vector<double> adv(n);
  for (double& a : adv) a = uniform(rng, -1.0, 1.0);
  const double c_min = uniform01(rng);
  const double c_max = 1.0 + 4.0 * uniform01(rng);
  return {std::move(beta), AdvantageVector(std::move(adv)), RerouteParams(c_min, c_max)};
}

}  // namespace

TEST(ProbVectorTest, RejectsBadDistributions) {
  EXPECT_THROW(ProbVector({0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(ProbVector({1.5, -0.5}), std::invalid_argument);
  EXPECT_THROW(ProbVector(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(ProbVector({NAN, 1.0}), std::invalid_argument);
  EXPECT_NO_THROW(ProbVector({0.5, 0.5 + 5e-9}));
}

TEST(ProbVectorTest, RerouteParamsFeasibility) {
  EXPECT_THROW(RerouteParams(1.2, 2.0), std::invalid_argument);
  EXPECT_THROW(RerouteParams(0.5, 0.9), std::invalid_argument);
  EXPECT_THROW(RerouteParams(-0.1, 2.0), std::invalid_argument);
  EXPECT_NO_THROW(RerouteParams(1.0, 1.0));
}

TEST(ProbVectorTest, ConstraintFactoriesValidate) {
  EXPECT_THROW(make_tv(0.0), std::invalid_argument);
  EXPECT_THROW(make_tv(1.5), std::invalid_argument);
  EXPECT_THROW(make_ppo(0.0), std::invalid_argument);
  EXPECT_THROW(make_forward_kl(-1.0), std::invalid_argument);
  EXPECT_EQ(label(make_reroute(0.5, 1.5)), "reroute(0.5,1.5)");
  EXPECT_FALSE(is_rank_based(make_forward_kl(1.0)));
  EXPECT_TRUE(is_rank_based(make_greedy()));
}

TEST(MaxRerouteTest, IdentityBox) {
  expect_probs(max_reroute({0.5, 0.5}, {3.0, -7.0}, {1.0, 1.0}), {0.5, 0.5});
}

TEST(MaxRerouteTest, TwoActions) {
  expect_probs(max_reroute({0.5, 0.5}, {-1.0, 1.0}, {0.5, 1.5}), {0.25, 0.75});
}

TEST(MaxRerouteTest, WideBoxIsGreedy) {
  expect_probs(max_reroute({0.2, 0.8}, {3.0, -1.0}, {0.0, 5.0}), {1.0, 0.0});
}

TEST(MaxRerouteTest, FourActionsMatchesLinprog) {
  // Reference from an interior-point/simplex LP solver run offline.
  const ProbVector pi = max_reroute({0.1, 0.2, 0.3, 0.4}, {0.7, -0.2, 0.9, 0.1}, {0.5, 2.0});
  expect_probs(pi, {0.1, 0.1, 0.6, 0.2});
  EXPECT_NEAR(objective(pi, {0.7, -0.2, 0.9, 0.1}), 0.61, 1e-12);
}

TEST(MaxRerouteTest, ZeroSupportStaysZero) {
  const ProbVector pi = max_reroute({0.0, 0.4, 0.6}, {5.0, 1.0, 0.0}, {0.5, 2.0});
  EXPECT_EQ(pi[0], 0.0);
}

TEST(MaxRerouteTest, RejectsLengthMismatch) {
  EXPECT_THROW(max_reroute({0.5, 0.5}, {1.0, 2.0, 3.0}, {0.5, 1.5}), std::invalid_argument);
}

TEST(MaxTvTest, MovesDeltaFromWorstToBest) {
  expect_probs(max_tv({0.5, 0.5}, {-1.0, 1.0}, 0.25), {0.25, 0.75});
}

TEST(MaxTvTest, UnboundedRatio) {
  expect_probs(max_tv({1.0, 0.0}, {0.0, 1.0}, 0.3), {0.7, 0.3});
}

TEST(MaxTvTest, CappedByAvailableMass) {
  expect_probs(max_tv({0.1, 0.9}, {-1.0, 1.0}, 0.5), {0.0, 1.0});
}

TEST(MaxTvTest, DrainsAscending) {
  expect_probs(max_tv({0.1, 0.2, 0.3, 0.4}, {0.0, -1.0, 2.0, 1.0}, 0.25), {0.05, 0.0, 0.55, 0.4});
}

TEST(MaxTvTest, RejectsDelta) {
  EXPECT_THROW(max_tv({0.5, 0.5}, {0.0, 1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(max_tv({0.5, 0.5}, {0.0, 1.0}, 1.01), std::invalid_argument);
}

TEST(MaxPpoTest, LeftoverGoesToArgmax) {
  expect_probs(max_ppo({0.5, 0.5}, {-1.0, 1.0}, 0.5), {0.0, 1.0});
}

TEST(MaxPpoTest, DescendingFill) {
  expect_probs(max_ppo({0.2, 0.3, 0.5}, {2.0, 1.0, -1.0}, 0.5), {0.55, 0.45, 0.0});
}

TEST(MaxPpoTest, AllNegative) {
  expect_probs(max_ppo({0.5, 0.5}, {-2.0, -1.0}, 0.5), {0.0, 1.0});
}

TEST(MaxForwardKlTest, DirectSubstitution) {
  const double e = std::exp(1.0);
  expect_probs(max_forward_kl({0.5, 0.5}, {0.0, 1.0}, 1.0), {1.0 / (1.0 + e), e / (1.0 + e)}, 1e-15);
  EXPECT_NEAR(max_forward_kl({0.5, 0.5}, {0.0, 1.0}, 1.0)[0], 0.26894, 1e-5);
}

TEST(MaxForwardKlTest, LargeLambdaKeepsBeta) {
  expect_probs(max_forward_kl({0.3, 0.7}, {-1.0, 1.0}, 1e12), {0.3, 0.7}, 1e-9);
}

TEST(MaxForwardKlTest, ZeroSupportPreserved) {
  const double e = std::exp(1.0);
  const double z = 0.4 * e + 0.6;
  expect_probs(max_forward_kl({0.0, 0.4, 0.6}, {5.0, 1.0, 0.0}, 1.0), {0.0, 0.4 * e / z, 0.6 / z}, 1e-15);
}

TEST(MaxForwardKlTest, OverflowSafe) {
  const ProbVector pi = max_forward_kl({0.5, 0.5}, {1000.0, 999.0}, 1e-3);
  expect_probs(pi, {1.0, 0.0});
  EXPECT_THROW(max_forward_kl({0.5, 0.5}, {0.0, 1.0}, 0.0), std::invalid_argument);
}

TEST(GreedyTest, Examples) {
  expect_probs(greedy_step({0.5, 0.5}, {-1.0, 1.0}), {0.0, 1.0});
  expect_probs(greedy_step({0.5, 0.5}, {2.0, 2.0}), {1.0, 0.0});
  expect_probs(greedy_step({0.2, 0.3, 0.5}, {0.3, 0.1, 0.9}), {0.0, 0.0, 1.0});
  EXPECT_THROW(greedy_step(ProbVector{}, AdvantageVector{}), std::invalid_argument);
}

TEST(LpOracleTest, Examples) {
  expect_probs(lp_oracle({0.3, 0.7}, {1.0, -1.0}, {1.0, 1.0}), {0.3, 0.7});
  expect_probs(lp_oracle({0.5, 0.5}, {-1.0, 1.0}, {0.5, 1.5}), {0.25, 0.75});
  expect_probs(lp_oracle({0.1, 0.2, 0.3, 0.4}, {0.7, -0.2, 0.9, 0.1}, {0.5, 2.0}), {0.1, 0.1, 0.6, 0.2});
}

TEST(LpOracleTest, MatchesMaxRerouteOnRandomInstances) {
  Engine rng = make_engine(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng, 2, 12);
    const double fast = objective(max_reroute(in.beta, in.adv, in.params), in.adv);
    const double slow = objective(lp_oracle(in.beta, in.adv, in.params), in.adv);
    ASSERT_NEAR(fast, slow, 1e-9) << "trial " << trial;
  }
}

TEST(ImprovementStepTest, Examples) {
  const ProbVector beta{0.5, 0.5};
  const AdvantageVector adv{-1.0, 1.0};
  EXPECT_EQ(improvement_step(beta, beta, adv), 0.0);
  EXPECT_DOUBLE_EQ(improvement_step({0.25, 0.75}, beta, adv), 0.5);
  EXPECT_THROW(improvement_step(beta, beta, {0.0, 1.0}), std::invalid_argument);
}

TEST(ImprovementStepTest, ConstrainedSolversNeverDecrease) {
  Engine rng = make_engine(12);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance in = random_instance(rng);
    const AdvantageVector adv = center_advantage(in.beta, in.adv.values());
    for (const ConstraintSpec& spec :
         {ConstraintSpec{constraint::Reroute{in.params}}, make_tv(0.3), make_ppo(0.2), make_greedy()}) {
      EXPECT_GE(improvement_step(solve(spec, in.beta, adv), in.beta, adv), -1e-12) << label(spec);
    }
  }
}

TEST(TvDistanceTest, Examples) {
  EXPECT_EQ(tv_distance({0.3, 0.7}, {0.3, 0.7}), 0.0);
  EXPECT_EQ(tv_distance({1.0, 0.0}, {0.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance({0.25, 0.75}, {0.5, 0.5}), 0.25);
}

TEST(RerouteTvBoundTest, Examples) {
  EXPECT_EQ(reroute_tv_bound({0.5, 1.5}), 0.25);
  EXPECT_EQ(reroute_tv_bound({1.0, 1.0}), 0.0);
  EXPECT_EQ(reroute_tv_bound({0.0, 2.0}), 0.5);
}

TEST(SolverPropertyTest, FeasibilityAndRankMonotonicity) {
  Engine rng = make_engine(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng);
    const std::size_t n = in.beta.size();

    const ProbVector r = max_reroute(in.beta, in.adv, in.params);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(r[i], in.params.c_min * in.beta[i] - 1e-12);
      EXPECT_LE(r[i], in.params.c_max * in.beta[i] + 1e-12);
    }
    EXPECT_TRUE(rank_monotone(r, in.beta, in.adv));
    EXPECT_LE(tv_distance(r, in.beta), reroute_tv_bound(in.params) + 1e-12);

    const double delta = 0.05 + 0.95 * uniform01(rng);
    const ProbVector t = max_tv(in.beta, in.adv, delta);
    EXPECT_LE(tv_distance(t, in.beta), delta + 1e-12);
    EXPECT_TRUE(rank_monotone(t, in.beta, in.adv));

    const ProbVector p = max_ppo(in.beta, in.adv, 0.1 + uniform01(rng));
    EXPECT_TRUE(rank_monotone(p, in.beta, in.adv));
    for (std::size_t i = 0; i < n; ++i) {
      if (in.adv[i] <= 0.0 && i != argmax_advantage(in.adv.values())) {
        EXPECT_EQ(p[i], 0.0);
      }
    }

    EXPECT_TRUE(rank_monotone(greedy_step(in.beta, in.adv), in.beta, in.adv));

    std::vector<double> sparse(in.beta.begin(), in.beta.end());
    sparse[0] = 0.0;
    const double rest = std::accumulate(sparse.begin(), sparse.end(), 0.0);
    if (rest > 0.0) {
      for (double& v : sparse) v /= rest;
      const ProbVector kl = max_forward_kl(ProbVector(sparse), in.adv, 0.5);
      EXPECT_EQ(kl[0], 0.0);
    }
  }
}

TEST(SolverPropertyTest, PermutationEquivariance) {
  Engine rng = make_engine(14);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance in = random_instance(rng);
    const std::size_t n = in.beta.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pb(n), pa(n);
    for (std::size_t i = 0; i < n; ++i) {
      pb[i] = in.beta[perm[i]];
      pa[i] = in.adv[perm[i]];
    }
    const ProbVector beta_p(pb);
    const AdvantageVector adv_p(pa);
    for (const ConstraintSpec& spec : {ConstraintSpec{constraint::Reroute{in.params}}, make_tv(0.3), make_ppo(0.2),
                                       make_forward_kl(0.7), make_greedy()}) {
      const ProbVector base = solve(spec, in.beta, in.adv);
      const ProbVector permuted = solve(spec, beta_p, adv_p);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(permuted[i], base[perm[i]], 1e-12) << label(spec);
    }
  }
}

TEST(SolverPropertyTest, Deterministic) {
  Engine rng = make_engine(15);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = random_instance(rng);
    for (const ConstraintSpec& spec : {ConstraintSpec{constraint::Reroute{in.params}}, make_tv(0.3), make_ppo(0.2),
                                       make_forward_kl(0.7), make_greedy()}) {
      EXPECT_EQ(solve(spec, in.beta, in.adv), solve(spec, in.beta, in.adv));
    }
  }
}
