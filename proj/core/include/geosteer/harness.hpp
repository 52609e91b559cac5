#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geosteer/covariance.hpp"
#include "geosteer/emlog.hpp"
#include "geosteer/enrml.hpp"
#include "geosteer/generator.hpp"
#include "geosteer/mcmc.hpp"

namespace geosteer {

struct WellConfig {
  int row = 32;
  int first_column = 0;
  int count = 9;

  std::vector<WellCell> cells() const { return horizontal_well(row, first_column, count); }
};

/// Measurement error model. Standard deviation max(rel_std |d|, floor);
/// within-position correlation exp(-|i - j| / corr_len_factor) over the
/// channel index; positions are independent.
struct NoiseConfig {
  double rel_std = 0.05;
  double floor = 1e-4;  // S/m
  double corr_len_factor = 10.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  double prior_variance = 1e-6;
  GeneratorConfig generator{};
  WellConfig well{};
  NoiseConfig noise{};
  ToolSpec tool = ToolSpec::standard();
  int ensemble_size = 100;
  EnrmlConfig enrml{};
  McmcConfig mcmc{};

  /// Throws ConfigError when the well leaves the grid, rel_std <= 0, etc.
  void validate() const;
  /// Switch to the full-size protocol: N = 500, 8 chains x 1e6 iterations, thin 100.
  void apply_paper_scale();
  PriorSpec prior() const { return {generator.latent_dim(), prior_variance, seed}; }
  /// MCMC settings with the chain seed taken from the experiment seed.
  McmcConfig mcmc_config() const;
};

/// Random stream identifiers. Every consumer of randomness owns one so that
/// the truth never shares draws with the prior ensemble.
enum class Stream : std::uint64_t {
  Truth = 1,
  PriorEnsemble = 2,
  ObservationNoise = 3,
  Perturbations = 4,
  Mcmc = 5,
  StatsPrior = 6,
  PriorDraws = 7,
};

Rng stream_for(const ExperimentConfig& cfg, Stream s);

struct Truth {
  Eigen::VectorXd latent;
  FaciesProbabilityGrid facies;
  ResistivityGrid resistivity;
};

Truth make_truth(const ExperimentConfig& cfg);

/// Latent vector -> stacked measurements along the configured well.
/// Only the drilled columns are generated.
Eigen::VectorXd well_log(const Eigen::VectorXd& m, const ExperimentConfig& cfg);
ForwardModel pipeline_forward(const ExperimentConfig& cfg);

/// Covariance of the measurement error given the clean per-position log.
BlockDiagCovariance build_noise_covariance(const std::vector<Eigen::VectorXd>& clean,
                                           const NoiseConfig& noise);

struct SyntheticData {
  std::vector<Eigen::VectorXd> clean;
  Eigen::VectorXd observed;  // stacked, clean + one noise realization
  BlockDiagCovariance cd;
};

/// Simulate the truth's log, build C_d from it and add one noise draw.
SyntheticData simulate_observations(const Truth& truth, const ExperimentConfig& cfg);

/// Observation model for the ensemble method: C_sc = diag(C_d) and one
/// perturbation per member from the perturbation stream.
ObservationModel build_observation_model(const SyntheticData& data, const ExperimentConfig& cfg);

TargetDensity build_target(const SyntheticData& data, const ExperimentConfig& cfg);

/// Per-cell resistivity mean and sample standard deviation over realizations.
struct ResistivityMoments {
  ResistivityGrid mean;
  ResistivityGrid std;
  Eigen::Index count = 0;
};

/// Throws InputError for fewer than two realizations.
ResistivityMoments resistivity_moments(const Eigen::MatrixXd& samples, const GeneratorConfig& gen);

/// Two-pass moments of already derived grids.
ResistivityMoments resistivity_moments(const std::vector<ResistivityGrid>& grids);

struct PosteriorSummary {
  ResistivityMoments posterior;
  ResistivityMoments prior;
  /// posterior std / prior std per cell; NaN where the prior std is zero.
  ResistivityGrid std_ratio;
  std::string method;
};

/// Posterior moments plus the ratio against a prior sample of the same size
/// drawn from the StatsPrior stream.
PosteriorSummary posterior_stats(const Eigen::MatrixXd& samples, const ExperimentConfig& cfg,
                                 const std::string& method);

/// Mean std ratio over drilled columns, rows within `window_m` of the well depth.
double near_well_ratio(const PosteriorSummary& s, const ExperimentConfig& cfg,
                       double window_m = 15.0);

/// Mean std ratio over the `columns` columns after the last drilled cell,
/// same vertical window.
double ahead_of_bit_ratio(const PosteriorSummary& s, const ExperimentConfig& cfg, int columns = 5,
                          double window_m = 15.0);

}  // namespace geosteer
