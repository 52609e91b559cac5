#include "geosteer/emlog.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "geosteer/errors.hpp"

namespace geosteer {

ToolSpec ToolSpec::standard() {
  ToolSpec t;
  for (double s : {0.25, 0.5, 1.0, 2.0}) t.channels.push_back({ChannelKind::Symmetric, s});
  for (double s : {2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0}) {
    t.channels.push_back({ChannelKind::Directional, s});
  }
  return t;
}

void validate(const ToolSpec& tool) {
  if (tool.channels.empty()) throw ConfigError("tool has no channels");
  for (const auto& ch : tool.channels) {
    if (!(ch.scale > 0.0) || !(ch.scale <= kMaxKernelScale)) {
      throw ConfigError("tool channel scale must lie in (0, 30] m");
    }
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper tail Q(x) = 1 - Phi(x).
double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Phi(b) - Phi(a) for a <= b, evaluated on the tail that avoids cancellation.
double gaussian_mass(double a, double b) {
  if (a >= 0.0) return upper_tail(a) - upper_tail(b);
  if (b <= 0.0) return upper_tail(-b) - upper_tail(-a);
  return 1.0 - upper_tail(-a) - upper_tail(b);
}

double half_bump(double x) { return std::isinf(x) ? 0.0 : 0.5 * std::exp(-0.5 * x * x); }

}  // namespace

double symmetric_kernel(double offset, double scale) {
  const double u = offset / scale;
  return std::exp(-0.5 * u * u) / (scale * std::sqrt(2.0 * std::numbers::pi));
}

double directional_kernel(double offset, double scale) {
  const double u = offset / scale;
  return 0.5 * u * std::exp(-0.5 * u * u) / scale;
}

Eigen::VectorXd forward(const LayeredMedium& medium, const ToolSpec& tool) {
  if (medium.resistivities.empty()) throw InputError("forward: medium has no layers");
  validate(medium);
  const std::size_t n_layers = medium.layer_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tool.size()));
  for (std::size_t k = 0; k < tool.size(); ++k) {
    const auto& ch = tool.channels[k];
    double acc = 0.0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const double lo = l == 0 ? -kInf : (medium.boundaries[l - 1] - medium.tool_tvd) / ch.scale;
      const double hi =
          l + 1 == n_layers ? kInf : (medium.boundaries[l] - medium.tool_tvd) / ch.scale;
      const double sigma = 1.0 / medium.resistivities[l];
      if (ch.kind == ChannelKind::Symmetric) {
        acc += sigma * gaussian_mass(lo, hi);
      } else {
        acc += sigma * (half_bump(lo) - half_bump(hi));
      }
    }
    out[static_cast<Eigen::Index>(k)] = acc;
  }
  return out;
}

std::vector<WellCell> horizontal_well(int row, int first_column, int count) {
  std::vector<WellCell> cells;
  cells.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) cells.push_back({first_column + i, row});
  return cells;
}

std::vector<Eigen::VectorXd> simulate_log(const ResistivityGrid& res,
                                          const std::vector<WellCell>& well,
                                          const ToolSpec& tool) {
  if (well.empty()) throw InputError("simulate_log: empty well");
  for (const auto& c : well) {
    if (c.row != well.front().row) throw InputError("simulate_log: well must be horizontal");
  }
  std::vector<Eigen::VectorXd> log;
  log.reserve(well.size());
  for (const auto& c : well) log.push_back(forward(extract_layers(res, c.column, c.row), tool));
  return log;
}

Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& log) {
  Eigen::Index n = 0;
  for (const auto& v : log) n += v.size();
  Eigen::VectorXd out(n);
  Eigen::Index off = 0;
  for (const auto& v : log) {
    out.segment(off, v.size()) = v;
    off += v.size();
  }
  return out;
}

}  // namespace geosteer
