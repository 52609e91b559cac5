#include "geosteer/mcmc.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "geosteer/errors.hpp"
#include "geosteer/parallel.hpp"

namespace geosteer {

double TargetDensity::log_prior(const Eigen::VectorXd& m) const {
  if (m.size() != dim()) throw ShapeError("log_prior: dimension mismatch");
  return -0.5 * (m.array().square() / prior_variance.array()).sum();
}

double TargetDensity::log_likelihood(const Eigen::VectorXd& m) const {
  const Eigen::VectorXd g = forward(m);
  if (g.size() != d_obs.size()) throw ShapeError("log_likelihood: forward output size mismatch");
  if (!g.allFinite()) throw NumericError("log_likelihood: forward model returned non-finite values");
  return -0.5 * cd.quad_form(g - d_obs);
}

double TargetDensity::log_posterior(const Eigen::VectorXd& m) const {
  if (!m.allFinite()) throw NumericError("log_posterior: non-finite parameters");
  return log_prior(m) + log_likelihood(m);
}

AdaptiveProposal::AdaptiveProposal(double beta, Eigen::VectorXd q_diagonal)
    : beta_(beta), q_(std::move(q_diagonal)) {
  if (!(beta_ > 0.0 && beta_ < 1.0)) throw ConfigError("proposal beta must lie in (0, 1)");
  if (q_.size() == 0 || !(q_.array() > 0.0).all()) {
    throw ConfigError("proposal Q must be a positive diagonal");
  }
  mean_ = Eigen::VectorXd::Zero(q_.size());
  m2_ = Eigen::MatrixXd::Zero(q_.size(), q_.size());
}

void AdaptiveProposal::observe(const Eigen::VectorXd& x) {
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_.noalias() += delta * (x - mean_).transpose();
}

Eigen::MatrixXd AdaptiveProposal::empirical_covariance() const {
  if (fixed_) return *fixed_;
  if (count_ < 2) return Eigen::MatrixXd::Zero(dim(), dim());
  const Eigen::MatrixXd c = m2_ / static_cast<double>(count_ - 1);
  return 0.5 * (c + c.transpose());
}

void AdaptiveProposal::set_fixed_covariance(const Eigen::MatrixXd& cov) {
  if (cov.rows() != dim() || cov.cols() != dim()) throw ShapeError("fixed covariance shape");
  fixed_ = cov;
}

void AdaptiveProposal::restore(std::int64_t count, Eigen::VectorXd mean, Eigen::MatrixXd scatter,
                               std::int64_t fallbacks) {
  if (mean.size() != dim() || scatter.rows() != dim() || scatter.cols() != dim()) {
    throw ShapeError("proposal restore: shape mismatch");
  }
  count_ = count;
  mean_ = std::move(mean);
  m2_ = std::move(scatter);
  fallbacks_ = fallbacks;
}

Eigen::VectorXd AdaptiveProposal::propose(const Eigen::VectorXd& current, Rng& rng) {
  if (current.size() != dim()) throw ShapeError("propose: dimension mismatch");
  const bool adaptive_ready = fixed_.has_value() || well_defined();
  const bool use_q = !adaptive_ready || rng.uniform() < beta_;
  const Eigen::VectorXd z = rng.normal_vector(dim());
  if (!use_q) {
    Eigen::MatrixXd c = empirical_covariance();
    // Jitter on the scale of Q keeps a rank-deficient early history factorable.
    c.diagonal() += 1e-10 * q_;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) {
      const double scale = 2.38 / std::sqrt(static_cast<double>(dim()));
      const Eigen::VectorXd step = llt.matrixL() * z;
      return current + scale * step;
    }
    ++fallbacks_;
  }
  return current + (q_.cwiseSqrt().array() * z.array()).matrix();
}

bool accept_move(double logf_current, double logf_candidate, Rng& rng) {
  const double log_ratio = logf_candidate - logf_current;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

const Eigen::VectorXd& accept(const Eigen::VectorXd& current, const Eigen::VectorXd& candidate,
                              double logf_current, double logf_candidate, Rng& rng) {
  return accept_move(logf_current, logf_candidate, rng) ? candidate : current;
}

void advance_chain(const TargetDensity& target, ChainState& state, std::int64_t n_iters,
                   ChainHistory& history) {
  if (history.stride < 1) throw ConfigError("history stride must be >= 1");
  const Eigen::Index dim = state.current.size();
  const auto extra = n_iters / history.stride;
  const Eigen::Index base = history.samples.cols();
  history.samples.conservativeResize(dim, base + extra);
  history.log_posteriors.conservativeResize(base + extra);
  Eigen::Index slot = base;

  for (std::int64_t i = 0; i < n_iters; ++i) {
    Eigen::VectorXd candidate = state.proposal.propose(state.current, state.rng);
    const double logf = target.log_posterior(candidate);
    if (accept_move(state.log_posterior, logf, state.rng)) {
      state.current = std::move(candidate);
      state.log_posterior = logf;
      ++state.accepted;
    }
    ++state.iteration;
    state.proposal.observe(state.current);
    if (state.iteration % history.stride == 0 && slot < history.samples.cols()) {
      history.samples.col(slot) = state.current;
      history.log_posteriors[slot] = state.log_posterior;
      ++slot;
    }
  }
  history.samples.conservativeResize(dim, slot);
  history.log_posteriors.conservativeResize(slot);
  history.iterations = state.iteration;
  history.accepted = state.accepted;
}

double psrf(const std::vector<Eigen::MatrixXd>& chains) {
  const auto m = static_cast<Eigen::Index>(chains.size());
  if (m < 2) throw DiagnosticError("psrf needs at least two chains");
  const Eigen::Index d = chains[0].rows();
  const Eigen::Index n = chains[0].cols();
  if (n < 2) throw DiagnosticError("psrf needs at least two samples per chain");
  for (const auto& c : chains) {
    if (c.rows() != d || c.cols() != n) throw DiagnosticError("psrf chains differ in shape");
  }

  Eigen::MatrixXd means(d, m);
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& c = chains[static_cast<std::size_t>(j)];
    means.col(j) = c.rowwise().mean();
    const Eigen::MatrixXd centered = c.colwise() - means.col(j);
    within.noalias() += centered * centered.transpose();
  }
  within /= static_cast<double>(m * (n - 1));
  const Eigen::VectorXd grand = means.rowwise().mean();
  const Eigen::MatrixXd spread = means.colwise() - grand;
  const Eigen::MatrixXd between_n = spread * spread.transpose() / static_cast<double>(m - 1);

  Eigen::LLT<Eigen::MatrixXd> llt(within);
  if (llt.info() != Eigen::Success || !(within.diagonal().array() > 0.0).all()) {
    throw DiagnosticError("psrf: within-chain covariance is singular");
  }
  // Symmetric form L^{-1} B L^{-T} has the same spectrum as W^{-1} B.
  const Eigen::MatrixXd half = llt.matrixL().solve(between_n);
  const Eigen::MatrixXd sym = llt.matrixL().solve(half.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (sym + sym.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const double lambda_max = std::max(0.0, eig.eigenvalues().maxCoeff());
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return (nn - 1.0) / nn + (mm + 1.0) / mm * lambda_max;
}

double psrf_second_half(const std::vector<ChainHistory>& chains, Eigen::Index upto) {
  std::vector<Eigen::MatrixXd> windows;
  windows.reserve(chains.size());
  const Eigen::Index start = upto / 2;
  for (const auto& c : chains) {
    if (c.samples.cols() < upto) throw DiagnosticError("psrf window exceeds recorded history");
    windows.push_back(c.samples.middleCols(start, upto - start));
  }
  return psrf(windows);
}

void McmcConfig::validate() const {
  if (chains < 1) throw ConfigError("need at least one chain");
  if (iters < 2) throw ConfigError("need at least two iterations");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (record_stride < 1 || thin % record_stride != 0) {
    throw ConfigError("record_stride must divide thin");
  }
  if ((iters / 2) % record_stride != 0) throw ConfigError("record_stride must divide iters / 2");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (psrf_points < 1) throw ConfigError("psrf_points must be >= 1");
}

std::int64_t retained_count(int chains, std::int64_t iters, int thin) {
  if (chains < 1 || iters < 1 || thin < 1) throw ConfigError("retained_count: bad arguments");
  const std::int64_t kept = iters - iters / 2;
  return static_cast<std::int64_t>(chains) * (kept / thin);
}

ChainState initial_chain_state(const TargetDensity& target, const McmcConfig& config, int index) {
  ChainState s;
  s.rng = Rng::stream(config.seed, 0x6d636d63ULL + static_cast<std::uint64_t>(index));
  s.current = (target.prior_variance.cwiseSqrt().array() *
               s.rng.normal_vector(target.dim()).array()).matrix();
  s.log_posterior = target.log_posterior(s.current);
  s.proposal = AdaptiveProposal(config.beta, config.q_diagonal.value_or(target.prior_variance));
  return s;
}

McmcResult run_mcmc(const TargetDensity& target, const McmcConfig& config) {
  config.validate();
  std::vector<ChainState> states;
  std::vector<ChainHistory> histories(static_cast<std::size_t>(config.chains));
  for (int c = 0; c < config.chains; ++c) {
    states.push_back(initial_chain_state(target, config, c));
    histories[static_cast<std::size_t>(c)].stride = config.record_stride;
  }
  return run_mcmc(target, config, std::move(states), std::move(histories));
}

McmcResult run_mcmc(const TargetDensity& target, const McmcConfig& config,
                    std::vector<ChainState> states, std::vector<ChainHistory> histories) {
  config.validate();
  if (states.size() != static_cast<std::size_t>(config.chains) || histories.size() != states.size()) {
    throw ConfigError("run_mcmc: one state and one history per chain required");
  }
  for (auto& h : histories) {
    if (h.stride != config.record_stride) throw ConfigError("run_mcmc: history stride mismatch");
  }

  parallel_for(states.size(), [&](std::size_t c) {
    const std::int64_t remaining = config.iters - states[c].iteration;
    if (remaining > 0) advance_chain(target, states[c], remaining, histories[c]);
  });

  McmcResult res;
  const Eigen::Index dim = target.dim();
  const std::int64_t first = config.iters / 2;
  const std::int64_t per_chain = retained_count(1, config.iters, config.thin);
  res.retained.resize(dim, static_cast<Eigen::Index>(per_chain) * config.chains);
  Eigen::Index col = 0;
  for (const auto& h : histories) {
    // Keep the last state of every thin-long block of the second half.
    // Iteration t (1-based) is recorded at column t / stride - 1.
    for (std::int64_t k = 0; k < per_chain; ++k) {
      const std::int64_t t = first + (k + 1) * config.thin;
      res.retained.col(col++) = h.samples.col(static_cast<Eigen::Index>(t / config.record_stride - 1));
    }
  }

  if (config.chains >= 2) {
    const Eigen::Index recorded = histories.front().samples.cols();
    for (int k = 1; k <= config.psrf_points; ++k) {
      const Eigen::Index upto = recorded * k / config.psrf_points;
      if (upto < 4) continue;
      PsrfPoint p;
      p.iteration = static_cast<std::int64_t>(upto) * config.record_stride;
      try {
        p.value = psrf_second_half(histories, upto);
      } catch (const DiagnosticError&) {
        p.value = std::numeric_limits<double>::infinity();
      }
      res.psrf_trace.push_back(p);
    }
    res.final_psrf = res.psrf_trace.empty() ? std::numeric_limits<double>::infinity()
                                            : res.psrf_trace.back().value;
  }
  res.histories = std::move(histories);
  res.final_states = std::move(states);
  return res;
}

}  // namespace geosteer
