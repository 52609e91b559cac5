#include "geosteer/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geosteer/errors.hpp"
#include "geosteer/parallel.hpp"
#include "geosteer/petro.hpp"

namespace geosteer {

void ExperimentConfig::validate() const {
  if (!(prior_variance > 0.0)) throw ConfigError("prior variance must be positive");
  if (!(noise.rel_std > 0.0)) throw ConfigError("noise rel_std must be positive");
  if (!(noise.floor > 0.0)) throw ConfigError("noise floor must be positive");
  if (!(noise.corr_len_factor > 0.0)) throw ConfigError("noise correlation length must be positive");
  if (well.count < 1) throw ConfigError("well must have at least one cell");
  const auto& g = generator.grid;
  if (!g.contains(well.first_column, well.row) ||
      !g.contains(well.first_column + well.count - 1, well.row)) {
    throw ConfigError("well leaves the grid");
  }
  if (ensemble_size < 2) throw ConfigError("ensemble size must be >= 2");
  geosteer::validate(tool);
  enrml.validate();
  mcmc.validate();
}

void ExperimentConfig::apply_paper_scale() {
  ensemble_size = 500;
  mcmc.chains = 8;
  mcmc.iters = 1'000'000;
  mcmc.thin = 100;
  mcmc.record_stride = 100;
}

Rng stream_for(const ExperimentConfig& cfg, Stream s) {
  return Rng::stream(cfg.seed, static_cast<std::uint64_t>(s));
}

McmcConfig ExperimentConfig::mcmc_config() const {
  McmcConfig c = mcmc;
  c.seed = stream_for(*this, Stream::Mcmc).engine()();
  return c;
}

Truth make_truth(const ExperimentConfig& cfg) {
  Rng rng = stream_for(cfg, Stream::Truth);
  Truth t;
  t.latent = sample_prior(cfg.prior(), 1, rng).col(0);
  t.facies = generate(t.latent, cfg.generator);
  t.resistivity = derive_resistivity(t.facies);
  return t;
}

Eigen::VectorXd well_log(const Eigen::VectorXd& m, const ExperimentConfig& cfg) {
  const int c0 = cfg.well.first_column;
  const int c1 = cfg.well.first_column + cfg.well.count;
  const FaciesProbabilityGrid facies = generate_columns(m, c0, c1, cfg.generator);
  return stack(simulate_log(derive_resistivity(facies), cfg.well.cells(), cfg.tool));
}

ForwardModel pipeline_forward(const ExperimentConfig& cfg) {
  return [cfg](const Eigen::VectorXd& m) { return well_log(m, cfg); };
}

BlockDiagCovariance build_noise_covariance(const std::vector<Eigen::VectorXd>& clean,
                                           const NoiseConfig& noise) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(clean.size());
  for (const auto& d : clean) {
    if (!d.allFinite()) throw NumericError("noise model: clean observations are not finite");
    const Eigen::Index n = d.size();
    Eigen::VectorXd sd(n);
    for (Eigen::Index i = 0; i < n; ++i) sd[i] = std::max(noise.rel_std * std::abs(d[i]), noise.floor);
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double rho = std::exp(-std::abs(static_cast<double>(i - j)) / noise.corr_len_factor);
        c(i, j) = rho * sd[i] * sd[j];
      }
    }
    blocks.push_back(std::move(c));
  }
  return BlockDiagCovariance(std::move(blocks));
}

SyntheticData simulate_observations(const Truth& truth, const ExperimentConfig& cfg) {
  SyntheticData data;
  data.clean = simulate_log(truth.resistivity, cfg.well.cells(), cfg.tool);
  data.cd = build_noise_covariance(data.clean, cfg.noise);
  Rng rng = stream_for(cfg, Stream::ObservationNoise);
  data.observed = stack(data.clean) + data.cd.sample(rng);
  return data;
}

ObservationModel build_observation_model(const SyntheticData& data, const ExperimentConfig& cfg) {
  Rng rng = stream_for(cfg, Stream::Perturbations);
  return ObservationModel::make(data.observed, data.cd, cfg.ensemble_size, rng);
}

TargetDensity build_target(const SyntheticData& data, const ExperimentConfig& cfg) {
  TargetDensity t;
  t.forward = pipeline_forward(cfg);
  t.d_obs = data.observed;
  t.cd = data.cd;
  t.prior_variance = Eigen::VectorXd::Constant(cfg.generator.latent_dim(), cfg.prior_variance);
  return t;
}

ResistivityMoments resistivity_moments(const std::vector<ResistivityGrid>& grids) {
  if (grids.size() < 2) throw InputError("resistivity moments need at least two realizations");
  const auto& g = grids.front().geometry();
  ResistivityMoments out{ResistivityGrid(g), ResistivityGrid(g), static_cast<Eigen::Index>(grids.size())};
  const double n = static_cast<double>(grids.size());
  for (int r = 0; r < g.nz; ++r) {
    for (int c = 0; c < g.nx; ++c) {
      double sum = 0.0;
      for (const auto& grid : grids) sum += grid.at(r, c);
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& grid : grids) ss += (grid.at(r, c) - mean) * (grid.at(r, c) - mean);
      out.mean.at(r, c) = mean;
      out.std.at(r, c) = std::sqrt(ss / (n - 1.0));
    }
  }
  return out;
}

ResistivityMoments resistivity_moments(const Eigen::MatrixXd& samples, const GeneratorConfig& gen) {
  if (samples.cols() < 2) throw InputError("resistivity moments need at least two realizations");
  std::vector<ResistivityGrid> grids(static_cast<std::size_t>(samples.cols()));
  parallel_for(grids.size(), [&](std::size_t j) {
    grids[j] = derive_resistivity(generate(samples.col(static_cast<Eigen::Index>(j)), gen));
  });
  return resistivity_moments(grids);
}

PosteriorSummary posterior_stats(const Eigen::MatrixXd& samples, const ExperimentConfig& cfg,
                                 const std::string& method) {
  PosteriorSummary s;
  s.method = method;
  s.posterior = resistivity_moments(samples, cfg.generator);
  Rng rng = stream_for(cfg, Stream::StatsPrior);
  const Eigen::MatrixXd prior = sample_prior(cfg.prior(), static_cast<int>(samples.cols()), rng);
  s.prior = resistivity_moments(prior, cfg.generator);
  const auto& g = cfg.generator.grid;
  s.std_ratio = ResistivityGrid(g);
  for (int r = 0; r < g.nz; ++r) {
    for (int c = 0; c < g.nx; ++c) {
      const double p = s.prior.std.at(r, c);
      s.std_ratio.at(r, c) =
          p > 0.0 ? s.posterior.std.at(r, c) / p : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return s;
}

namespace {

double window_mean(const ResistivityGrid& ratio, const ExperimentConfig& cfg, int c0, int c1,
                   double window_m) {
  const auto& g = ratio.geometry();
  const double well_depth = (cfg.well.row + 0.5) * g.dz;
  double sum = 0.0;
  int n = 0;
  for (int c = std::max(c0, 0); c < std::min(c1, g.nx); ++c) {
    for (int r = 0; r < g.nz; ++r) {
      const double depth = (r + 0.5) * g.dz;
      const double v = ratio.at(r, c);
      if (std::abs(depth - well_depth) <= window_m && std::isfinite(v)) {
        sum += v;
        ++n;
      }
    }
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double near_well_ratio(const PosteriorSummary& s, const ExperimentConfig& cfg, double window_m) {
  return window_mean(s.std_ratio, cfg, cfg.well.first_column,
                     cfg.well.first_column + cfg.well.count, window_m);
}

double ahead_of_bit_ratio(const PosteriorSummary& s, const ExperimentConfig& cfg, int columns,
                          double window_m) {
  const int start = cfg.well.first_column + cfg.well.count;
  return window_mean(s.std_ratio, cfg, start, start + columns, window_m);
}

}  // namespace geosteer
