#include <gtest/gtest.h>

#include <Eigen/LU>

#include "geosteer/errors.hpp"
#include "geosteer/mcmc.hpp"
#include "oracles.hpp"

using namespace geosteer;

namespace {

TargetDensity linear_target(const oracle::LinearProblem& p) {
  TargetDensity t;
  const Eigen::MatrixXd a = p.a;
  t.forward = [a](const Eigen::VectorXd& m) -> Eigen::VectorXd { return a * m; };
  t.d_obs = p.d_obs;
  t.cd = BlockDiagCovariance::diagonal(Eigen::VectorXd::Constant(p.d_obs.size(), p.noise_sd * p.noise_sd));
  t.prior_variance = p.prior_var;
  return t;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.colwise() - x.rowwise().mean();
  return c * c.transpose() / static_cast<double>(x.cols() - 1);
}

}  // namespace

TEST(TargetDensity, VanishesAtExactFitAndPriorMode) {
  TargetDensity t;
  t.forward = [](const Eigen::VectorXd& m) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(3, 1.0) + m.head(3); };
  t.d_obs = Eigen::VectorXd::Constant(3, 1.0);
  t.cd = BlockDiagCovariance::diagonal(Eigen::Vector3d(0.1, 0.2, 0.3));
  t.prior_variance = Eigen::VectorXd::Constant(4, 2.0);
  EXPECT_EQ(t.log_posterior(Eigen::VectorXd::Zero(4)), 0.0);
}

TEST(TargetDensity, DoublingNoiseQuartersLikelihood) {
  const auto p = oracle::make_linear_problem(7, 4, 1.0, 0.3, 1);
  TargetDensity t = linear_target(p);
  TargetDensity wide = t;
  wide.cd = BlockDiagCovariance::diagonal(Eigen::VectorXd::Constant(7, 4 * 0.09));
  const Eigen::Vector4d m(0.3, -1.2, 0.5, 2.0);
  EXPECT_NEAR(wide.log_likelihood(m), 0.25 * t.log_likelihood(m), 1e-12 * std::abs(t.log_likelihood(m)));
}

TEST(TargetDensity, MatchesDenseQuadraticForm) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  // Correlated two-block noise covariance.
  std::vector<Eigen::MatrixXd> blocks;
  for (int b = 0; b < 2; ++b) {
    Eigen::MatrixXd l(4, 4);
    for (auto& v : l.reshaped()) v = z(gen);
    blocks.push_back(l * l.transpose() + Eigen::MatrixXd::Identity(4, 4));
  }
  Eigen::MatrixXd a(8, 5);
  for (auto& v : a.reshaped()) v = z(gen);
  Eigen::VectorXd d(8);
  for (auto& v : d) v = z(gen);
  TargetDensity t;
  t.forward = [a](const Eigen::VectorXd& m) -> Eigen::VectorXd { return a * m; };
  t.d_obs = d;
  t.cd = BlockDiagCovariance(blocks);
  t.prior_variance = Eigen::VectorXd::LinSpaced(5, 0.5, 2.5);

  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(8, 8);
  dense.topLeftCorner(4, 4) = blocks[0];
  dense.bottomRightCorner(4, 4) = blocks[1];
  const Eigen::MatrixXd dense_inv = dense.inverse();
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd m(5);
    for (auto& v : m) v = z(gen);
    const Eigen::VectorXd r = a * m - d;
    double prior = 0.0;
    for (int i = 0; i < 5; ++i) prior += m[i] * m[i] / t.prior_variance[i];
    const double want = -0.5 * prior - 0.5 * r.dot(dense_inv * r);
    EXPECT_NEAR(t.log_posterior(m), want, 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(TargetDensity, NonFiniteForwardIsNumericError) {
  TargetDensity t;
  t.forward = [](const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(2, std::nan("")); };
  t.d_obs = Eigen::VectorXd::Zero(2);
  t.cd = BlockDiagCovariance::diagonal(Eigen::Vector2d(1, 1));
  t.prior_variance = Eigen::VectorXd::Ones(2);
  EXPECT_THROW(t.log_posterior(Eigen::VectorXd::Zero(2)), NumericError);
}

TEST(AdaptiveProposal, UsesOnlyQUntilHistoryIsLongEnough) {
  const int d = 6;
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(d, 0.01);
  AdaptiveProposal p(0.05, q);
  // A wildly spread history that would dominate an adaptive draw.
  Rng rng(3);
  // d + 1 states is the longest history that still leaves C~ undefined.
  for (int i = 0; i < d + 1; ++i) p.observe(100.0 * rng.normal_vector(d));
  ASSERT_FALSE(p.well_defined());
  Eigen::MatrixXd steps(d, 20000);
  for (Eigen::Index j = 0; j < steps.cols(); ++j) steps.col(j) = p.propose(Eigen::VectorXd::Zero(d), rng);
  const Eigen::MatrixXd c = sample_cov(steps);
  for (int i = 0; i < d; ++i) EXPECT_NEAR(c(i, i), 0.01, 0.001);
  p.observe(rng.normal_vector(d));
  EXPECT_TRUE(p.well_defined());
}

TEST(AdaptiveProposal, IncrementsHaveZeroMean) {
  const int d = 4;
  AdaptiveProposal p(0.05, Eigen::VectorXd::Constant(d, 1.0));
  Rng rng(9);
  const Eigen::Vector4d current(1.0, -2.0, 0.5, 3.0);
  Eigen::MatrixXd draws(d, 100000);
  for (Eigen::Index j = 0; j < draws.cols(); ++j) draws.col(j) = p.propose(current, rng);
  const Eigen::VectorXd mean = draws.rowwise().mean();
  const Eigen::VectorXd se = (sample_cov(draws).diagonal() / static_cast<double>(draws.cols())).cwiseSqrt();
  for (int i = 0; i < d; ++i) EXPECT_LE(std::abs(mean[i] - current[i]), 3.0 * se[i]);
}

TEST(AdaptiveProposal, AdaptiveScaleIsTwoPointThreeEightSquaredOverDim) {
  const int d = 60;
  Rng rng(12);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) l(i, j) = (i == j ? 1.0 : 0.2) * rng.normal();
    l(i, i) = std::abs(l(i, i)) + 0.5;
  }
  const Eigen::MatrixXd c = l * l.transpose();
  // beta -> 0: only the adaptive component contributes.
  AdaptiveProposal p(1e-300, Eigen::VectorXd::Ones(d));
  p.set_fixed_covariance(c);
  Eigen::MatrixXd steps(d, 100000);
  for (Eigen::Index j = 0; j < steps.cols(); ++j) steps.col(j) = p.propose(Eigen::VectorXd::Zero(d), rng);
  const Eigen::MatrixXd want = 2.38 * 2.38 / d * c;
  const Eigen::MatrixXd got = sample_cov(steps);
  EXPECT_LE((got - want).norm() / want.norm(), 0.10);
  for (int i = 0; i < d; ++i) EXPECT_NEAR(got(i, i) / want(i, i), 1.0, 0.10);
}

TEST(AdaptiveProposal, RunningCovarianceUsesOnlyObservedStates) {
  Rng rng(2);
  AdaptiveProposal p(0.05, Eigen::VectorXd::Ones(3));
  Eigen::MatrixXd xs(3, 50);
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    xs.col(j) = rng.normal_vector(3) + Eigen::Vector3d(1, 2, 3);
    p.observe(xs.col(j));
  }
  EXPECT_TRUE(p.empirical_covariance().isApprox(sample_cov(xs), 1e-12));
  EXPECT_TRUE(p.running_mean().isApprox(xs.rowwise().mean(), 1e-12));
  EXPECT_EQ(p.history_count(), 50);
}

TEST(Accept, HigherOrEqualDensityIsAlwaysAccepted) {
  Rng rng(1);
  const Eigen::VectorXd cur = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd cand = Eigen::VectorXd::Ones(2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(&accept(cur, cand, -3.0, -2.0, rng), &cand);
    EXPECT_EQ(&accept(cur, cand, -3.0, -3.0, rng), &cand);
  }
}

TEST(Accept, BernoulliFrequencyMatchesRatio) {
  Rng rng(42);
  for (double r : {0.25, 0.6, 0.05}) {
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += accept_move(0.0, std::log(r), rng) ? 1 : 0;
    EXPECT_NEAR(static_cast<double>(hits) / n, r, 0.01) << r;
  }
}

TEST(Psrf, IndependentChainsFromOneGaussianAreNearOne) {
  Rng rng(5);
  std::vector<Eigen::MatrixXd> chains;
  for (int c = 0; c < 4; ++c) {
    Eigen::MatrixXd x(3, 10000);
    for (auto& v : x.reshaped()) v = rng.normal();
    chains.push_back(x);
  }
  const double r = psrf(chains);
  EXPECT_GE(r, 0.99);
  EXPECT_LE(r, 1.05);
}

TEST(Psrf, SeparatedChainsAreFarAboveThreshold) {
  Rng rng(6);
  Eigen::MatrixXd a(2, 1000);
  Eigen::MatrixXd b(2, 1000);
  for (auto& v : a.reshaped()) v = 10.0 + rng.normal();
  for (auto& v : b.reshaped()) v = -10.0 + rng.normal();
  EXPECT_GT(psrf({a, b}), 10.0);
}

TEST(Psrf, DuplicatedChainHasNoBetweenChainTerm) {
  Rng rng(7);
  Eigen::MatrixXd a(3, 500);
  for (auto& v : a.reshaped()) v = rng.normal();
  // With B = 0 the max-root statistic reduces to its (n - 1)/n within-chain term.
  EXPECT_NEAR(psrf({a, a}), 499.0 / 500.0, 1e-12);
}

TEST(Psrf, DegenerateInputsAreDiagnosticErrors) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(2, 50);
  EXPECT_THROW(psrf({a}), DiagnosticError);
  EXPECT_THROW(psrf({a, Eigen::MatrixXd::Random(2, 40)}), DiagnosticError);
  EXPECT_THROW(psrf({Eigen::MatrixXd::Ones(2, 50), Eigen::MatrixXd::Ones(2, 50)}), DiagnosticError);
}

TEST(Retention, CountsFollowTheThinningRule) {
  EXPECT_EQ(retained_count(8, 1'000'000, 100), 40'000);
  EXPECT_EQ(retained_count(4, 20'000, 10), 4'000);
  EXPECT_EQ(retained_count(4, 50'000, 10), 10'000);
  EXPECT_EQ(retained_count(1, 7, 2), 2);  // second half holds iterations 4..7
}

TEST(RunMcmc, RetainedSamplesAreTheThinnedSecondHalf) {
  const auto p = oracle::make_linear_problem(6, 3, 1.0, 0.5, 2);
  const TargetDensity t = linear_target(p);
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iters = 400;
  cfg.thin = 10;
  cfg.record_stride = 1;
  cfg.seed = 11;
  const McmcResult r = run_mcmc(t, cfg);
  ASSERT_EQ(r.retained.cols(), retained_count(2, 400, 10));
  ASSERT_EQ(r.histories[0].samples.cols(), 400);
  // Chain 1's first retained sample is the state after iteration 210.
  EXPECT_EQ(r.retained.col(20), r.histories[1].samples.col(209));
  EXPECT_EQ(r.retained.col(0), r.histories[0].samples.col(209));
  EXPECT_EQ(r.retained.col(19), r.histories[0].samples.col(399));
}

TEST(RunMcmc, FixedSeedsGiveIdenticalChains) {
  const auto p = oracle::make_linear_problem(6, 3, 1.0, 0.5, 3);
  const TargetDensity t = linear_target(p);
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iters = 2000;
  cfg.seed = 5;
  const McmcResult a = run_mcmc(t, cfg);
  const McmcResult b = run_mcmc(t, cfg);
  EXPECT_EQ(a.retained, b.retained);
  EXPECT_EQ(a.histories[1].log_posteriors, b.histories[1].log_posteriors);
  cfg.seed = 6;
  EXPECT_NE(run_mcmc(t, cfg).retained, a.retained);
}

TEST(RunMcmc, ResumingFromSavedStateIsBitIdentical) {
  const auto p = oracle::make_linear_problem(6, 3, 1.0, 0.5, 4);
  const TargetDensity t = linear_target(p);
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iters = 3000;
  cfg.seed = 8;
  const McmcResult full = run_mcmc(t, cfg);

  McmcConfig half = cfg;
  half.iters = 1000;
  const McmcResult first = run_mcmc(t, half);
  // Round-trip the RNG through its text form, as a checkpoint would.
  std::vector<ChainState> states = first.final_states;
  for (auto& s : states) {
    Rng copy;
    copy.load(s.rng.save());
    s.rng = copy;
  }
  const McmcResult resumed = run_mcmc(t, cfg, states, first.histories);
  EXPECT_EQ(resumed.retained, full.retained);
  EXPECT_EQ(resumed.histories[0].samples, full.histories[0].samples);
}

TEST(RunMcmc, PureQProposalIsPlainRandomWalk) {
  // beta -> 1 leaves only the fixed component; acceptance then depends on Q alone.
  const auto p = oracle::make_linear_problem(6, 3, 1.0, 0.5, 5);
  const TargetDensity t = linear_target(p);
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iters = 4000;
  cfg.beta = 0.999999;
  cfg.q_diagonal = Eigen::VectorXd::Constant(3, 1e-10);
  cfg.seed = 3;
  const McmcResult r = run_mcmc(t, cfg);
  // Tiny steps on a smooth target are accepted almost always.
  EXPECT_GT(r.histories[0].acceptance_rate(), 0.99);
  EXPECT_EQ(r.final_states[0].proposal.fallbacks(), 0);
}

TEST(RunMcmc, KnownGaussianTargetMoments) {
  // Identity forward map in 5 dimensions.
  oracle::LinearProblem p;
  p.a = Eigen::MatrixXd::Identity(5, 5);
  p.prior_var = Eigen::VectorXd::Constant(5, 4.0);
  p.noise_sd = 0.5;
  p.d_obs = Eigen::VectorXd::LinSpaced(5, 1.0, 3.0);
  const TargetDensity t = linear_target(p);
  McmcConfig cfg;
  cfg.chains = 4;
  cfg.iters = 50000;
  cfg.thin = 10;
  cfg.seed = 21;
  const McmcResult r = run_mcmc(t, cfg);
  const Eigen::VectorXd mean = r.retained.rowwise().mean();
  EXPECT_LE((mean - p.posterior_mean()).norm() / p.posterior_mean().norm(), 0.05);
  const Eigen::MatrixXd cov = sample_cov(r.retained);
  EXPECT_LE((cov - p.posterior_cov()).norm() / p.posterior_cov().norm(), 0.10);
  EXPECT_LT(r.final_psrf, 1.1);
}

TEST(McmcConfig, ValidateChecksStrideAndBeta) {
  McmcConfig c;
  EXPECT_NO_THROW(c.validate());
  c.record_stride = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.beta = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.thin = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
