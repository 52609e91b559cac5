#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "geosteer/covariance.hpp"
#include "geosteer/rng.hpp"

namespace geosteer {

/// Un-normalized Gaussian log posterior: zero-mean diagonal prior plus a
/// Gaussian likelihood of the forward model around the observations.
struct TargetDensity {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> forward;
  Eigen::VectorXd d_obs;
  BlockDiagCovariance cd;
  Eigen::VectorXd prior_variance;

  Eigen::Index dim() const { return prior_variance.size(); }
  double log_prior(const Eigen::VectorXd& m) const;
  double log_likelihood(const Eigen::VectorXd& m) const;
  /// Throws NumericError if the forward model returns non-finite values.
  double log_posterior(const Eigen::VectorXd& m) const;
};

/// Adaptive Metropolis proposal: a mixture of N(m, 2.38^2/d * C_emp) with
/// weight 1 - beta and N(m, Q) with weight beta. C_emp is the running
/// covariance of every state the chain has visited so far. Until more than
/// d + 1 states have been seen only the Q component is used.
class AdaptiveProposal {
 public:
  AdaptiveProposal() = default;
  AdaptiveProposal(double beta, Eigen::VectorXd q_diagonal);

  /// Add one visited state to the running mean/covariance.
  void observe(const Eigen::VectorXd& x);
  Eigen::VectorXd propose(const Eigen::VectorXd& current, Rng& rng);

  bool well_defined() const { return count_ > dim() + 1; }
  Eigen::Index dim() const { return q_.size(); }
  std::int64_t history_count() const { return count_; }
  double beta() const { return beta_; }
  const Eigen::VectorXd& q_diagonal() const { return q_; }
  Eigen::MatrixXd empirical_covariance() const;
  const Eigen::VectorXd& running_mean() const { return mean_; }
  /// Number of adaptive draws that had to fall back to Q because the
  /// empirical covariance could not be factored.
  std::int64_t fallbacks() const { return fallbacks_; }

  /// Replace the adaptive covariance with a fixed matrix (history frozen).
  /// Used for testing the proposal scale.
  void set_fixed_covariance(const Eigen::MatrixXd& cov);

  // Checkpoint access.
  const Eigen::MatrixXd& scatter() const { return m2_; }
  void restore(std::int64_t count, Eigen::VectorXd mean, Eigen::MatrixXd scatter,
               std::int64_t fallbacks);

 private:
  double beta_ = 0.05;
  Eigen::VectorXd q_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  std::int64_t count_ = 0;
  std::int64_t fallbacks_ = 0;
  std::optional<Eigen::MatrixXd> fixed_;
};

/// Metropolis acceptance for a symmetric proposal: move with probability
/// min(1, exp(logF_candidate - logF_current)).
bool accept_move(double logf_current, double logf_candidate, Rng& rng);

/// The element the chain holds after the accept/reject step.
const Eigen::VectorXd& accept(const Eigen::VectorXd& current, const Eigen::VectorXd& candidate,
                              double logf_current, double logf_candidate, Rng& rng);

/// Recorded samples of one chain. Column t holds the state after iteration
/// (t + 1) * stride.
struct ChainHistory {
  Eigen::MatrixXd samples;  // dim x recorded
  Eigen::VectorXd log_posteriors;
  std::int64_t iterations = 0;
  std::int64_t accepted = 0;
  int stride = 1;

  double acceptance_rate() const {
    return iterations > 0 ? static_cast<double>(accepted) / static_cast<double>(iterations) : 0.0;
  }
};

/// Full restartable state of one chain.
struct ChainState {
  Eigen::VectorXd current;
  double log_posterior = 0.0;
  AdaptiveProposal proposal;
  Rng rng;
  std::int64_t iteration = 0;
  std::int64_t accepted = 0;
};

/// Advance `state` by n_iters propose/accept steps, recording every
/// `history.stride`-th state into `history`.
void advance_chain(const TargetDensity& target, ChainState& state, std::int64_t n_iters,
                   ChainHistory& history);

/// Brooks-Gelman multivariate potential scale reduction factor (maximum-root
/// form) for equal-length chains given as dim x n matrices:
///   R = (n-1)/n + (m+1)/m * lambda_max(W^{-1} B/n).
/// Throws DiagnosticError for fewer than two chains, unequal lengths, or a
/// singular within-chain covariance.
double psrf(const std::vector<Eigen::MatrixXd>& chains);

/// psrf over the second half of the first `upto` recorded samples of each chain.
double psrf_second_half(const std::vector<ChainHistory>& chains, Eigen::Index upto);

struct McmcConfig {
  int chains = 4;
  std::int64_t iters = 20000;
  int thin = 10;
  double beta = 0.05;
  /// Q diagonal; defaults to the prior variance.
  std::optional<Eigen::VectorXd> q_diagonal;
  std::uint64_t seed = 0;
  /// Record every k-th state for diagnostics; must divide `thin`.
  int record_stride = 1;
  /// Number of points on the PSRF trace.
  int psrf_points = 10;

  void validate() const;
};

/// Number of samples kept by the retention rule: drop the first half of each
/// chain, keep every `thin`-th state of the second half.
std::int64_t retained_count(int chains, std::int64_t iters, int thin);

struct PsrfPoint {
  std::int64_t iteration = 0;
  double value = 0.0;
};

struct McmcResult {
  Eigen::MatrixXd retained;  // dim x retained_count
  std::vector<ChainHistory> histories;
  std::vector<ChainState> final_states;
  std::vector<PsrfPoint> psrf_trace;
  double final_psrf = 0.0;
};

/// Initial state for chain `index`: a draw from the prior on its own stream.
ChainState initial_chain_state(const TargetDensity& target, const McmcConfig& config, int index);

/// Run independent chains (concurrently) and collect the retained samples
/// chain by chain.
McmcResult run_mcmc(const TargetDensity& target, const McmcConfig& config);

/// Continue from saved chains (e.g. checkpoints) until each has run
/// `config.iters` iterations in total. One state and history per chain.
McmcResult run_mcmc(const TargetDensity& target, const McmcConfig& config,
                    std::vector<ChainState> states, std::vector<ChainHistory> histories);

}  // namespace geosteer
