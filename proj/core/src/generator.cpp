#include "geosteer/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geosteer/errors.hpp"

namespace geosteer {

Eigen::MatrixXd sample_prior(const PriorSpec& spec, int count, Rng& rng) {
  if (count < 1) throw ConfigError("sample_prior: count must be >= 1");
  if (spec.dim < 1) throw ConfigError("sample_prior: dim must be >= 1");
  if (!(spec.variance > 0.0) || !std::isfinite(spec.variance)) {
    throw ConfigError("sample_prior: variance must be positive and finite");
  }
  const double sd = std::sqrt(spec.variance);
  Eigen::MatrixXd out(spec.dim, count);
  for (int j = 0; j < count; ++j) {
    for (int i = 0; i < spec.dim; ++i) out(i, j) = sd * rng.normal();
  }
  return out;
}

Eigen::MatrixXd sample_prior(const PriorSpec& spec, int count) {
  Rng rng(spec.seed);
  return sample_prior(spec, count, rng);
}

namespace {

double logistic(double t) {
  // Symmetric form keeps both tails accurate.
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

struct Body {
  double depth;       // row coordinate of the top line at the body center
  double center;      // column coordinate of the lens center
  double thickness;   // rows
  double half_length; // columns
  double amplitude;   // rows
  double wavenumber;  // rad per column
  double phase;
  double ecc;
  double reach;       // crevasse reach beyond the tip, columns
  double reach_bias;
  double crev_thickness;
  double presence;
};

std::vector<Body> decode(const Eigen::VectorXd& m, const GeneratorConfig& cfg) {
  const int k_bodies = cfg.bodies;
  const auto& g = cfg.grid;
  std::vector<Body> bodies;
  bodies.reserve(static_cast<std::size_t>(k_bodies));
  const double lim = cfg.clamp_sigma;
  auto u = [&](int k, int c) {
    return std::clamp(m[k * 12 + c] / cfg.latent_scale, -lim, lim);
  };
  for (int k = 0; k < k_bodies; ++k) {
    // Bodies are spread over depth slots and a permuted set of lateral slots
    // so that the section is covered without a positional trend.
    const double z_slot = g.nz * (k + 0.5) / k_bodies;
    const int perm = (k * 3) % k_bodies;
    const double x_slot = g.nx * (perm + 0.5) / k_bodies;

    Body b{};
    b.thickness = std::clamp(cfg.thickness_rows + cfg.thickness_sd_rows * u(k, 2), 2.0, 20.0);
    b.depth = z_slot + cfg.depth_sd_rows * u(k, 0) - 0.5 * b.thickness;
    b.center = x_slot + cfg.lateral_sd_cols * u(k, 1);
    b.half_length = cfg.half_length_cols * std::exp(cfg.half_length_log_sd * u(k, 3));
    b.amplitude = std::clamp(cfg.undulation_rows * (1.0 + 0.5 * u(k, 4)), 0.0, 4.0 * cfg.undulation_rows);
    b.wavenumber = 2.0 * std::numbers::pi / (cfg.wavelength_cols * std::exp(0.1 * u(k, 5)));
    b.phase = 0.5 * u(k, 6);
    b.ecc = cfg.eccentricity * std::tanh(u(k, 7));
    b.reach = cfg.crevasse_reach_cols * std::exp(0.3 * u(k, 8));
    b.crev_thickness = std::clamp(cfg.crevasse_thickness_rows * (1.0 + 0.3 * u(k, 9)), 1.0, 8.0);
    b.reach_bias = 0.5 * std::tanh(u(k, 10));
    b.presence = logistic(cfg.presence_bias + cfg.presence_gain * u(k, 11));
    bodies.push_back(b);
  }
  return bodies;
}

// Parabolic base profile: 1 at the (eccentric) thalweg, 0 at both tips.
double base_profile(double xi, double ecc) {
  const double span = xi >= ecc ? (1.0 - ecc) : (1.0 + ecc);
  const double t = (xi - ecc) / span;
  return 1.0 - t * t;
}

void fill_columns(const std::vector<Body>& bodies, const GeneratorConfig& cfg, int col_begin,
                  int col_end, FaciesProbabilityGrid& out) {
  const auto& g = cfg.grid;
  const std::size_t nb = bodies.size();
  std::vector<double> top(nb), base(nb), lateral(nb);
  std::vector<double> crev_lateral(nb);  // normalized signed distance into the fringe

  for (int col = col_begin; col < col_end; ++col) {
    const double x = col + 0.5;
    for (std::size_t k = 0; k < nb; ++k) {
      const Body& b = bodies[k];
      const double dx = x - b.center;
      const double xi = dx / b.half_length;
      top[k] = b.depth + b.amplitude * std::sin(b.wavenumber * dx + b.phase);
      base[k] = top[k] + b.thickness * base_profile(xi, b.ecc);
      lateral[k] = logistic((b.half_length - std::abs(dx)) / cfg.falloff_cols);
      const double reach = b.reach * (1.0 + b.reach_bias * std::tanh(xi));
      // Fringe only: beyond the inner part of the lens, out to the reach.
      crev_lateral[k] =
          std::min(b.half_length + reach - std::abs(dx), std::abs(dx) - 0.8 * b.half_length) /
          cfg.falloff_cols;
    }
    for (int row = 0; row < g.nz; ++row) {
      const double z = row + 0.5;
      double not_channel = 1.0;
      double not_crevasse = 1.0;
      for (std::size_t k = 0; k < nb; ++k) {
        const Body& b = bodies[k];
        const double inside = std::min(z - top[k], base[k] - z);
        not_channel *= 1.0 - b.presence * lateral[k] * logistic(inside / cfg.falloff_rows);
        // Splay sheet sitting on the channel top line, thinning with the falloff.
        const double sheet = std::min(z - (top[k] - b.crev_thickness), top[k] + 0.5 - z);
        not_crevasse *= 1.0 - logistic(std::min(sheet / cfg.falloff_rows, crev_lateral[k]));
      }
      const double channel = 1.0 - not_channel;
      const double crevasse = not_channel * (1.0 - not_crevasse);
      const double background = not_channel * not_crevasse;
      out.at(row, col, Facies::Background) = background;
      out.at(row, col, Facies::Channel) = channel;
      out.at(row, col, Facies::Crevasse) = crevasse;
    }
  }
}

void validate(const Eigen::VectorXd& m, const GeneratorConfig& cfg) {
  if (m.size() != cfg.latent_dim()) {
    throw ShapeError("generate: latent vector has " + std::to_string(m.size()) +
                     " components, expected " + std::to_string(cfg.latent_dim()));
  }
  if (!m.allFinite()) throw NumericError("generate: latent vector has non-finite components");
}

}  // namespace

FaciesProbabilityGrid generate_columns(const Eigen::VectorXd& m, int col_begin, int col_end,
                                       const GeneratorConfig& cfg) {
  validate(m, cfg);
  if (col_begin < 0 || col_end > cfg.grid.nx || col_begin > col_end) {
    throw BoundsError("generate_columns: column range out of grid");
  }
  FaciesProbabilityGrid grid(cfg.grid);
  fill_columns(decode(m, cfg), cfg, col_begin, col_end, grid);
  return grid;
}

FaciesProbabilityGrid generate(const Eigen::VectorXd& m, const GeneratorConfig& cfg) {
  return generate_columns(m, 0, cfg.grid.nx, cfg);
}

double facies_fraction(const FaciesProbabilityGrid& grid, Facies f) {
  const auto& g = grid.geometry();
  std::size_t hits = 0;
  for (int r = 0; r < g.nz; ++r) {
    for (int c = 0; c < g.nx; ++c) {
      const auto p = grid.cell(r, c);
      const auto best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
      if (best == static_cast<int>(f)) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(g.cells());
}

}  // namespace geosteer
