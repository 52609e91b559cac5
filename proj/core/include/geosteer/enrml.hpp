#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "geosteer/covariance.hpp"
#include "geosteer/rng.hpp"

namespace geosteer {

/// Observed data, its error covariance and the fixed per-member data
/// perturbations.
struct ObservationModel {
  Eigen::VectorXd d_obs;
  BlockDiagCovariance cd;
  /// Diagonal of the scaling matrix C_sc (measurement variances).
  Eigen::VectorXd scaling;
  /// n_data x N, column j is epsilon_j ~ N(0, C_d). Drawn once, held fixed.
  Eigen::MatrixXd perturbations;

  Eigen::Index data_size() const { return d_obs.size(); }
  Eigen::Index ensemble_size() const { return perturbations.cols(); }

  /// C_sc = diag(C_d) and N perturbations drawn from `rng`.
  static ObservationModel make(Eigen::VectorXd d_obs, BlockDiagCovariance cd, int ensemble_size,
                               Rng& rng);
};

/// Levenberg-Marquardt schedule and stopping rule.
struct EnrmlConfig {
  double lambda0 = 1.0;
  double lambda_up = 4.0;
  double lambda_down = 4.0;
  double svd_energy = 0.99;
  double conv_tol = 0.01;
  /// Bound on accepted updates.
  int max_iter = 30;
  /// Give up after this many rejected steps in a row.
  int max_rejections = 20;
  /// Correlation threshold in [0, 1); empty means no localization.
  std::optional<double> localization;

  void validate() const;
};

/// Mean-removed ensemble deviations divided by sqrt(N - 1). Data and noise
/// anomalies are additionally scaled by C_sc^{-1/2}.
struct Anomalies {
  Eigen::MatrixXd dm;   // dim x N
  Eigen::MatrixXd dd;   // n_data x N
  Eigen::MatrixXd de;   // n_data x N
};

/// Throws InputError for N < 2 and ShapeError for inconsistent sizes.
Anomalies compute_anomalies(const Eigen::MatrixXd& ensemble, const Eigen::MatrixXd& predictions,
                            const ObservationModel& obs);

struct TruncatedSvd {
  Eigen::MatrixXd u;  // n_data x p
  Eigen::VectorXd s;  // p
  Eigen::MatrixXd v;  // N x p
  Eigen::Index rank() const { return s.size(); }
};

/// Keep the smallest p whose cumulative singular-value sum reaches
/// `energy` of the total. Throws RankError when the matrix is numerically zero.
TruncatedSvd truncate_svd(const Eigen::MatrixXd& dd, double energy = 0.99);

/// Pieces of one update. Member j moves by -gain * residuals.col(j).
struct UpdateTerms {
  Eigen::MatrixXd gain;       // dim x n_data (acts on scaled residuals)
  Eigen::MatrixXd residuals;  // C_sc^{-1/2} (g(m_j) - d_obs - eps_j), n_data x N
};

/// Gain of the approximate Levenberg-Marquardt step in the truncated
/// subspace:
///   K = dm V_p Z [(1 + lambda) zeta + I]^{-1} (U_p S_p^{-1} Z)^T
/// with (Z, zeta) the eigenpairs of S_p^{-1} U_p^T de de^T U_p S_p^{-1}.
UpdateTerms update_terms(const Anomalies& anomalies, const TruncatedSvd& svd,
                         const ObservationModel& obs, double lambda,
                         const Eigen::MatrixXd& predictions);

/// delta m for every member (dim x N).
Eigen::MatrixXd enrml_update(const Anomalies& anomalies, const TruncatedSvd& svd,
                             const ObservationModel& obs, double lambda,
                             const Eigen::MatrixXd& predictions);

/// Zero every gain entry whose parameter/datum ensemble correlation has
/// magnitude below `threshold`, then recompute delta m. Threshold 0 masks
/// nothing and reproduces enrml_update bit for bit.
Eigen::MatrixXd localize(const UpdateTerms& terms, const Anomalies& anomalies, double threshold);

/// |corr(m_p, d_i)| over the ensemble, dim x n_data. Rows or columns without
/// spread get zero.
Eigen::MatrixXd ensemble_correlation(const Anomalies& anomalies);

/// Mean over members of (g(m_j) - d_obs - eps_j)^T C_d^{-1} (...).
double mean_misfit(const Eigen::MatrixXd& predictions, const ObservationModel& obs);

using ForwardModel = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Forward model on every column. Throws NumericError naming the members
/// whose predictions are not finite.
Eigen::MatrixXd evaluate_ensemble(const ForwardModel& forward, const Eigen::MatrixXd& ensemble);

/// One trial step. `iteration` numbers the trials; entry 0 is the prior.
struct IterationRecord {
  int iteration = 0;
  double lambda = 0.0;
  double misfit = 0.0;
  bool accepted = false;
  double relative_change = 0.0;
  Eigen::Index rank = 0;
};

struct EnrmlResult {
  Eigen::MatrixXd ensemble;
  Eigen::MatrixXd predictions;
  std::vector<IterationRecord> log;  // entry 0 is the prior
  bool converged = false;
  int accepted = 0;
};

/// Iterate the approximate LM update. A trial step is accepted (and lambda
/// divided by lambda_down) when the mean misfit drops; otherwise it is
/// discarded and lambda multiplied by lambda_up. The run converges when a
/// trial changes the misfit by less than conv_tol (relative); rejected trials
/// only count once at least one update has been accepted. It stops unconverged
/// after max_iter accepted updates or max_rejections rejections in a row.
EnrmlResult run_enrml(const Eigen::MatrixXd& prior, const ObservationModel& obs,
                      const ForwardModel& forward, const EnrmlConfig& config);

}  // namespace geosteer
