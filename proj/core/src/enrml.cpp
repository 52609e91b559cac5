#include "geosteer/enrml.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "geosteer/errors.hpp"
#include "geosteer/parallel.hpp"

namespace geosteer {

ObservationModel ObservationModel::make(Eigen::VectorXd d_obs, BlockDiagCovariance cd,
                                        int ensemble_size, Rng& rng) {
  if (d_obs.size() != cd.dim()) throw ShapeError("observation/covariance size mismatch");
  if (ensemble_size < 2) throw InputError("ensemble size must be at least 2");
  ObservationModel obs;
  obs.scaling = cd.diagonal();
  obs.perturbations = cd.sample(rng, ensemble_size);
  obs.d_obs = std::move(d_obs);
  obs.cd = std::move(cd);
  return obs;
}

void EnrmlConfig::validate() const {
  if (!(svd_energy > 0.0 && svd_energy <= 1.0)) throw ConfigError("svd_energy must be in (0, 1]");
  if (!(conv_tol > 0.0)) throw ConfigError("conv_tol must be positive");
  if (!(lambda0 >= 0.0)) throw ConfigError("lambda0 must be non-negative");
  if (!(lambda_up >= 1.0) || !(lambda_down >= 1.0)) {
    throw ConfigError("lambda_up and lambda_down must be >= 1");
  }
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (max_rejections < 1) throw ConfigError("max_rejections must be >= 1");
  if (localization && !(*localization >= 0.0 && *localization < 1.0)) {
    throw ConfigError("localization threshold must be in [0, 1)");
  }
}

namespace {

// X (I - 11^T/N) / sqrt(N-1)
Eigen::MatrixXd centered(const Eigen::MatrixXd& x) {
  const double n = static_cast<double>(x.cols());
  const Eigen::VectorXd mean = x.rowwise().mean();
  Eigen::MatrixXd c = (x.colwise() - mean) / std::sqrt(n - 1.0);
  // A constant row has no spread; the rounded mean must not invent one.
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (x.row(i).minCoeff() == x.row(i).maxCoeff()) c.row(i).setZero();
  }
  return c;
}

Eigen::VectorXd inv_sqrt(const Eigen::VectorXd& v) { return v.cwiseSqrt().cwiseInverse(); }

}  // namespace

Anomalies compute_anomalies(const Eigen::MatrixXd& ensemble, const Eigen::MatrixXd& predictions,
                            const ObservationModel& obs) {
  const auto n = ensemble.cols();
  if (n < 2) throw InputError("degenerate ensemble: need at least 2 members");
  if (predictions.cols() != n || obs.perturbations.cols() != n) {
    throw ShapeError("ensemble, predictions and perturbations differ in member count");
  }
  if (predictions.rows() != obs.data_size() || obs.perturbations.rows() != obs.data_size() ||
      obs.scaling.size() != obs.data_size()) {
    throw ShapeError("prediction size does not match observation size");
  }
  const Eigen::VectorXd w = inv_sqrt(obs.scaling);
  Anomalies a;
  a.dm = centered(ensemble);
  a.dd = w.asDiagonal() * centered(predictions);
  a.de = w.asDiagonal() * centered(obs.perturbations);
  return a;
}

TruncatedSvd truncate_svd(const Eigen::MatrixXd& dd, double energy) {
  if (!(energy > 0.0 && energy <= 1.0)) throw ConfigError("svd energy must be in (0, 1]");
  if (!dd.allFinite()) throw NumericError("truncate_svd: non-finite input");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dd, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[0] > 0.0)) {
    throw RankError("truncate_svd: data anomalies are zero (ensemble collapse)");
  }
  // Singular values at rounding level are not part of the spectrum.
  const double tiny = sv[0] * static_cast<double>(std::max(dd.rows(), dd.cols())) *
                      std::numeric_limits<double>::epsilon();
  Eigen::Index numeric_rank = 0;
  while (numeric_rank < sv.size() && sv[numeric_rank] > tiny) ++numeric_rank;

  std::vector<double> cumulative(static_cast<std::size_t>(numeric_rank));
  double run = 0.0;
  for (Eigen::Index i = 0; i < numeric_rank; ++i) {
    run += sv[i];
    cumulative[static_cast<std::size_t>(i)] = run;
  }
  const double target = energy * run;
  Eigen::Index p = numeric_rank;
  for (Eigen::Index i = 0; i < numeric_rank; ++i) {
    if (cumulative[static_cast<std::size_t>(i)] >= target) {
      p = i + 1;
      break;
    }
  }
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(p);
  out.s = sv.head(p);
  out.v = svd.matrixV().leftCols(p);
  return out;
}

UpdateTerms update_terms(const Anomalies& anomalies, const TruncatedSvd& svd,
                         const ObservationModel& obs, double lambda,
                         const Eigen::MatrixXd& predictions) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (svd.rank() == 0 || (svd.s.array() <= 0.0).any()) {
    throw RankError("update: truncated SVD has a zero singular value");
  }
  const Eigen::VectorXd s_inv = svd.s.cwiseInverse();

  // S^{-1} U^T de, then its Gram matrix.
  const Eigen::MatrixXd proj = s_inv.asDiagonal() * (svd.u.transpose() * anomalies.de);
  const Eigen::MatrixXd noise_gram = proj * proj.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noise_gram);
  if (eig.info() != Eigen::Success) throw NumericError("update: eigen-decomposition failed");
  const Eigen::MatrixXd& z = eig.eigenvectors();
  const Eigen::VectorXd damp =
      ((1.0 + lambda) * eig.eigenvalues().array().max(0.0) + 1.0).inverse().matrix();

  // V Z D^{-1} Z^T S^{-1} U^T
  const Eigen::MatrixXd left = svd.v * z * damp.asDiagonal();
  const Eigen::MatrixXd right = z.transpose() * s_inv.asDiagonal() * svd.u.transpose();

  UpdateTerms t;
  t.gain = anomalies.dm * (left * right);
  const Eigen::VectorXd w = inv_sqrt(obs.scaling);
  t.residuals = w.asDiagonal() *
                ((predictions - obs.perturbations).colwise() - obs.d_obs);
  return t;
}

Eigen::MatrixXd enrml_update(const Anomalies& anomalies, const TruncatedSvd& svd,
                             const ObservationModel& obs, double lambda,
                             const Eigen::MatrixXd& predictions) {
  const UpdateTerms t = update_terms(anomalies, svd, obs, lambda, predictions);
  return -(t.gain * t.residuals);
}

Eigen::MatrixXd ensemble_correlation(const Anomalies& anomalies) {
  const Eigen::VectorXd m_norm = anomalies.dm.rowwise().norm();
  const Eigen::VectorXd d_norm = anomalies.dd.rowwise().norm();
  Eigen::MatrixXd c = anomalies.dm * anomalies.dd.transpose();
  for (Eigen::Index p = 0; p < c.rows(); ++p) {
    for (Eigen::Index i = 0; i < c.cols(); ++i) {
      const double denom = m_norm[p] * d_norm[i];
      c(p, i) = denom > 0.0 ? std::abs(c(p, i)) / denom : 0.0;
    }
  }
  return c;
}

Eigen::MatrixXd localize(const UpdateTerms& terms, const Anomalies& anomalies, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw ConfigError("localization threshold must be in [0, 1)");
  }
  Eigen::MatrixXd gain = terms.gain;
  if (threshold > 0.0) {
    const Eigen::MatrixXd corr = ensemble_correlation(anomalies);
    gain = (corr.array() >= threshold).select(gain, 0.0);
  }
  return -(gain * terms.residuals);
}

double mean_misfit(const Eigen::MatrixXd& predictions, const ObservationModel& obs) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
    const Eigen::VectorXd r = predictions.col(j) - obs.d_obs - obs.perturbations.col(j);
    total += obs.cd.quad_form(r);
  }
  return total / static_cast<double>(predictions.cols());
}

Eigen::MatrixXd evaluate_ensemble(const ForwardModel& forward, const Eigen::MatrixXd& ensemble) {
  const auto n = static_cast<std::size_t>(ensemble.cols());
  std::vector<Eigen::VectorXd> out(n);
  parallel_for(n, [&](std::size_t j) {
    out[j] = forward(ensemble.col(static_cast<Eigen::Index>(j)));
  });
  std::string bad;
  for (std::size_t j = 0; j < n; ++j) {
    if (out[j].size() != out[0].size()) throw ShapeError("forward model output size varies");
    if (!out[j].allFinite()) bad += (bad.empty() ? "" : ", ") + std::to_string(j);
  }
  if (!bad.empty()) throw NumericError("non-finite forward output for members: " + bad);
  Eigen::MatrixXd pred(out.empty() ? 0 : out[0].size(), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) pred.col(static_cast<Eigen::Index>(j)) = out[j];
  return pred;
}

EnrmlResult run_enrml(const Eigen::MatrixXd& prior, const ObservationModel& obs,
                      const ForwardModel& forward, const EnrmlConfig& config) {
  config.validate();
  if (prior.cols() != obs.ensemble_size()) {
    throw ShapeError("prior ensemble size differs from the number of perturbations");
  }
  if (!prior.allFinite()) throw NumericError("prior ensemble has non-finite members");

  EnrmlResult res;
  res.ensemble = prior;
  res.predictions = evaluate_ensemble(forward, prior);
  double misfit = mean_misfit(res.predictions, obs);
  double lambda = config.lambda0;
  res.log.push_back({0, lambda, misfit, true, 0.0, 0});

  int rejections = 0;
  for (int it = 1; res.accepted < config.max_iter && rejections < config.max_rejections; ++it) {
    const Anomalies a = compute_anomalies(res.ensemble, res.predictions, obs);
    const TruncatedSvd svd = truncate_svd(a.dd, config.svd_energy);
    const UpdateTerms terms = update_terms(a, svd, obs, lambda, res.predictions);
    const Eigen::MatrixXd step = config.localization ? localize(terms, a, *config.localization)
                                                     : Eigen::MatrixXd(-(terms.gain * terms.residuals));

    Eigen::MatrixXd candidate = res.ensemble + step;
    Eigen::MatrixXd cand_pred = evaluate_ensemble(forward, candidate);
    const double cand_misfit = mean_misfit(cand_pred, obs);

    IterationRecord rec{it, lambda, cand_misfit, false, 0.0, svd.rank()};
    rec.relative_change = std::abs(misfit - cand_misfit) / misfit;
    if (cand_misfit < misfit) {
      rec.accepted = true;
      res.ensemble = std::move(candidate);
      res.predictions = std::move(cand_pred);
      misfit = cand_misfit;
      lambda /= config.lambda_down;
      ++res.accepted;
      rejections = 0;
    } else {
      lambda = lambda > 0.0 ? lambda * config.lambda_up : 1.0;
      ++rejections;
    }
    res.log.push_back(rec);
    // After some progress, a damped step that no longer moves the misfit
    // means the iteration has stalled at its minimum.
    if (rec.relative_change < config.conv_tol && (rec.accepted || res.accepted > 0)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace geosteer
