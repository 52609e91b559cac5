// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "geosteer/emlog.hpp"
#include "geosteer/enrml.hpp"
#include "geosteer/harness.hpp"
#include "geosteer/mcmc.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

using namespace geosteer;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

Outcome linear_enrml() {
  const auto p = oracle::make_linear_problem(30, 20, 1.0, 0.5, 16);
  Rng rng(17);
  const ObservationModel obs = ObservationModel::make(
      p.d_obs, BlockDiagCovariance::diagonal(Eigen::VectorXd::Constant(30, 0.25)), 2000, rng);
  Eigen::MatrixXd prior(20, 2000);
  for (auto& v : prior.reshaped()) v = rng.normal();
  const Eigen::MatrixXd a = p.a;
  const ForwardModel fwd = [a](const Eigen::VectorXd& m) -> Eigen::VectorXd { return a * m; };
  EnrmlConfig cfg;
  cfg.lambda0 = 0.0;
  const auto t0 = Clock::now();
  const EnrmlResult r = run_enrml(prior, obs, fwd, cfg);
  const double secs = seconds_since(t0);
  const Eigen::VectorXd want = p.posterior_mean();
  const double err = (r.ensemble.rowwise().mean() - want).norm() / want.norm();
  return {r.converged && err <= 0.05 && secs < 10.0,
          fmt("rel. mean error %.4f (<= 0.05), %.2f s (< 10)", err, secs)};
}

Outcome linear_mcmc() {
  const auto p = oracle::make_linear_problem(8, 5, 1.0, 0.5, 22);
  TargetDensity t;
  const Eigen::MatrixXd a = p.a;
  t.forward = [a](const Eigen::VectorXd& m) -> Eigen::VectorXd { return a * m; };
  t.d_obs = p.d_obs;
  t.cd = BlockDiagCovariance::diagonal(Eigen::VectorXd::Constant(8, 0.25));
  t.prior_variance = p.prior_var;
  McmcConfig cfg;
  cfg.chains = 4;
  cfg.iters = 50000;
  cfg.thin = 10;
  cfg.seed = 23;
  const McmcResult r = run_mcmc(t, cfg);
  const Eigen::VectorXd mean = r.retained.rowwise().mean();
  const Eigen::MatrixXd c = r.retained.colwise() - mean;
  const Eigen::MatrixXd cov = c * c.transpose() / static_cast<double>(r.retained.cols() - 1);
  const double mean_err = (mean - p.posterior_mean()).norm() / p.posterior_mean().norm();
  const double cov_err = (cov - p.posterior_cov()).norm() / p.posterior_cov().norm();
  return {mean_err <= 0.05 && cov_err <= 0.10 && r.final_psrf < 1.1,
          fmt("mean err %.4f (<= 0.05), cov err %.4f (<= 0.10), psrf %.4f (< 1.1)", mean_err, cov_err,
              r.final_psrf)};
}

Outcome forward_oracle() {
  const ToolSpec tool = ToolSpec::standard();
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double resist[] = {220.0, 3.6, 4.1};
  double worst = 0.0;
  for (int medium = 0; medium < 50; ++medium) {
    LayeredMedium m;
    m.tool_tvd = 16.0 + 0.5 * (u(gen) - 0.5);
    // Up to three boundaries on each side of the tool, as the layer extraction delivers.
    const int above = static_cast<int>(u(gen) * 4);
    const int below = std::max(above == 0 ? 1 : 0, static_cast<int>(u(gen) * 4));
    double z = m.tool_tvd;
    for (int b = 0; b < above; ++b) {
      z -= 0.25 + 6.0 * u(gen);
      m.boundaries.insert(m.boundaries.begin(), z);
    }
    z = m.tool_tvd;
    for (int b = 0; b < below; ++b) {
      z += 0.25 + 6.0 * u(gen);
      m.boundaries.push_back(z);
    }
    const int n_bound = above + below;
    // Log-uniform in [0.5, 500] Ohm m; neighbours must differ.
    for (int l = 0; l <= n_bound; ++l) {
      double r = 0.0;
      do {
        r = 0.5 * std::pow(1000.0, u(gen));
      } while (!m.resistivities.empty() && r == m.resistivities.back());
      m.resistivities.push_back(r);
    }
    const Eigen::VectorXd d = forward(m, tool);
    for (std::size_t k = 0; k < tool.size(); ++k) {
      const double q = oracle::quadrature_response(m, tool.channels[k]);
      const double scale = std::max(std::abs(q), 1e-12);
      worst = std::max(worst, std::abs(d[static_cast<Eigen::Index>(k)] - q) / scale);
    }
  }
  double homo = 0.0;
  for (double r : resist) {
    const Eigen::VectorXd d = forward(LayeredMedium{{}, {r}, 16.0}, tool);
    for (std::size_t k = 0; k < tool.size(); ++k) {
      const double want = tool.channels[k].kind == ChannelKind::Symmetric ? 1.0 / r : 0.0;
      homo = std::max(homo, std::abs(d[static_cast<Eigen::Index>(k)] - want));
    }
  }
  return {worst <= 1e-6 && homo <= 1e-12,
          fmt("max rel. error vs quadrature %.2e (<= 1e-6), homogeneous %.2e (<= 1e-12)", worst, homo)};
}

Outcome update_identities() {
  const auto p = oracle::make_linear_problem(15, 30, 1.0, 0.5, 41);
  Rng rng(42);
  ObservationModel obs = ObservationModel::make(
      p.d_obs, BlockDiagCovariance::diagonal(Eigen::VectorXd::Constant(15, 0.25)), 12, rng);
  Eigen::MatrixXd ens(30, 12);
  for (auto& v : ens.reshaped()) v = rng.normal();
  const Eigen::MatrixXd pred = p.a * ens;
  const Anomalies an = compute_anomalies(ens, pred, obs);
  const TruncatedSvd svd = truncate_svd(an.dd);

  // Subspace property.
  const Eigen::MatrixXd dm = enrml_update(an, svd, obs, 0.5, pred);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(an.dm);
  const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(qr.rank());
  double proj = 0.0;
  for (Eigen::Index j = 0; j < dm.cols(); ++j) {
    proj = std::max(proj, (dm.col(j) - q * (q.transpose() * dm.col(j))).norm() / dm.col(j).norm());
  }

  // Damping monotonicity.
  bool monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 1.0, 10.0, 1e3, 1e9}) {
    const double n = enrml_update(an, svd, obs, lambda, pred).norm();
    monotone = monotone && n <= previous * (1 + 1e-12);
    previous = n;
  }

  // Zero residual: g(m_j) = d_obs + eps_j.
  ObservationModel exact = obs;
  exact.d_obs.setZero();
  exact.perturbations = pred;
  const Anomalies an0 = compute_anomalies(ens, pred, exact);
  const double fixed = enrml_update(an0, truncate_svd(an0.dd), exact, 0.0, pred).cwiseAbs().maxCoeff();

  const Eigen::Index p_hand = truncate_svd(Eigen::MatrixXd(Eigen::Vector3d(10, 9, 0.1).asDiagonal()), 0.99).rank();

  return {proj <= 1e-8 && monotone && fixed <= 1e-12 && p_hand == 2,
          fmt("projection residual %.1e, monotone %g, fixed-point step %.1e, p on diag(10,9,0.1) = %g", proj,
              monotone ? 1.0 : 0.0, fixed, static_cast<double>(p_hand))};
}

Outcome desk_replica() {
  ExperimentConfig cfg;
  const Truth truth = make_truth(cfg);
  const SyntheticData data = simulate_observations(truth, cfg);
  const ObservationModel obs = build_observation_model(data, cfg);
  Rng rng = stream_for(cfg, Stream::PriorEnsemble);
  const Eigen::MatrixXd prior = sample_prior(cfg.prior(), cfg.ensemble_size, rng);

  const auto t0 = Clock::now();
  const EnrmlResult er = run_enrml(prior, obs, pipeline_forward(cfg), cfg.enrml);
  const double enrml_secs = seconds_since(t0);
  const double near = near_well_ratio(posterior_stats(er.ensemble, cfg, "enrml"), cfg);

  const McmcResult mr = run_mcmc(build_target(data, cfg), cfg.mcmc_config());
  const double ahead = ahead_of_bit_ratio(posterior_stats(mr.retained, cfg, "mcmc"), cfg);

  const bool enrml_ok = er.converged && er.accepted <= 30 && enrml_secs < 300.0 && near < 0.8;
  const bool mcmc_ok = mr.final_psrf < 1.2 && ahead < 1.0;
  std::string detail = fmt("EnRML converged=%g after %g updates in %.1f s, near-well ratio %.3f (< 0.8); ",
                           er.converged ? 1.0 : 0.0, er.accepted, enrml_secs, near);
  detail += fmt("MCMC psrf %.3g (< 1.2), ahead-of-bit ratio %.3f (< 1.0)", mr.final_psrf, ahead);
  return {enrml_ok && mcmc_ok, detail};
}

Outcome cli_determinism() {
  const auto a = pipeline::fresh_dir("accept_a");
  const auto b = pipeline::fresh_dir("accept_b");
  if (const int code = pipeline::run_all(a, 5); code != 0) return {false, fmt("pipeline exit %g", code)};
  if (const int code = pipeline::rerun_from_manifests(a, b); code != 0) return {false, fmt("rerun exit %g", code)};
  const auto first = pipeline::snapshot(a);
  const auto second = pipeline::snapshot(b);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) ++differing;
  }
  return {differing == 0 && first.size() == second.size(),
          fmt("%g files, %g differ after manifest rerun", static_cast<double>(first.size()),
              static_cast<double>(differing))};
}

Outcome retention() {
  const std::int64_t n = retained_count(8, 1000000, 100);
  return {n == 40000, fmt("8 chains x 1e6 iterations, thin 100 -> %g samples (== 40000)", static_cast<double>(n))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 linear-Gaussian EnRML", linear_enrml},
      {"2 linear-Gaussian MCMC", linear_mcmc},
      {"3 forward model vs quadrature", forward_oracle},
      {"4 update identities", update_identities},
      {"5 desk-scale replica", desk_replica},
      {"6 CLI determinism", cli_determinism},
      {"7 retention arithmetic", retention},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
