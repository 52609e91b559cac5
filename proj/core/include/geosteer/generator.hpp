#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "geosteer/grid.hpp"
#include "geosteer/rng.hpp"

namespace geosteer {

/// Gaussian prior on the latent vector, N(0, variance * I).
struct PriorSpec {
  int dim = 60;
  double variance = 1e-6;
  std::uint64_t seed = 0;
};

/// Draws `count` latent vectors (as columns, dim x count). Throws ConfigError
/// for non-positive count, dimension or variance.
Eigen::MatrixXd sample_prior(const PriorSpec& spec, int count);
/// Same, drawing from a caller-owned stream.
Eigen::MatrixXd sample_prior(const PriorSpec& spec, int count, Rng& rng);

/// Shape parameters of the procedural channel-body generator.
///
/// Latent layout: 12 consecutive components per body,
///   0 depth offset      1 lateral offset     2 thickness
///   3 half-length       4 undulation amp     5 undulation wavelength
///   6 undulation phase  7 eccentricity       8 crevasse reach
///   9 crevasse thickness 10 crevasse side bias 11 body presence
/// Components are first normalized by `latent_scale` (the prior standard
/// deviation) and clamped to +-`clamp_sigma`.
struct GeneratorConfig {
  GridGeometry grid{};
  int bodies = 5;
  double latent_scale = 1e-3;
  double clamp_sigma = 6.0;

  // Logistic falloff lengths of the soft memberships.
  double falloff_rows = 3.0;
  double falloff_cols = 5.0;

  // Channel geometry (rows/columns). Thickness mean 8.4 rows = 4.2 m.
  double thickness_rows = 8.4;
  double thickness_sd_rows = 2.0;
  double half_length_cols = 34.0;
  double half_length_log_sd = 0.12;
  double depth_sd_rows = 2.5;
  double lateral_sd_cols = 3.0;
  double undulation_rows = 1.5;
  double wavelength_cols = 40.0;
  double eccentricity = 0.3;

  // Crevasse fringes.
  double crevasse_reach_cols = 6.0;
  double crevasse_thickness_rows = 5.0;

  // Body presence: logistic(presence_bias + presence_gain * u).
  double presence_bias = 1.5;
  double presence_gain = 0.8;

  int latent_dim() const { return bodies * 12; }
};

/// Deterministic latent -> facies probability map.
///
/// Throws ShapeError when m has the wrong dimension and NumericError when it
/// contains non-finite values.
FaciesProbabilityGrid generate(const Eigen::VectorXd& m, const GeneratorConfig& cfg = {});

/// Evaluate only columns [col_begin, col_end). Cells outside the range are
/// left at zero. Values inside the range equal those of the full generate().
FaciesProbabilityGrid generate_columns(const Eigen::VectorXd& m, int col_begin, int col_end,
                                       const GeneratorConfig& cfg = {});

/// Fraction of cells whose most probable facies is `f`.
double facies_fraction(const FaciesProbabilityGrid& grid, Facies f);

}  // namespace geosteer
