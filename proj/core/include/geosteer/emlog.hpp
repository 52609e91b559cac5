#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "geosteer/grid.hpp"
#include "geosteer/petro.hpp"

namespace geosteer {

enum class ChannelKind { Symmetric, Directional };

struct ToolChannel {
  ChannelKind kind = ChannelKind::Symmetric;
  double scale = 1.0;  // kernel standard deviation, m
};

/// Channel layout of the logging tool. The default is four shallow symmetric
/// channels and nine deep directional ones.
struct ToolSpec {
  std::vector<ToolChannel> channels;

  static ToolSpec standard();
  std::size_t size() const { return channels.size(); }
};

/// Largest admissible kernel scale: the tool does not see past 30 m.
inline constexpr double kMaxKernelScale = 30.0;

/// Throws ConfigError for an empty channel list or a scale outside (0, 30] m.
void validate(const ToolSpec& tool);

/// Kernel-weighted conductivity response of every channel.
///
/// Symmetric channels average conductivity with a unit-mass Gaussian of
/// standard deviation s centred on the tool (apparent conductivity, S/m).
/// Directional channels use the odd kernel
///   w(z') = (z'/s) exp(-z'^2 / 2 s^2) / (2 s),
/// which integrates to zero and returns half of a conductivity step located at
/// the tool, positive when the conductive side lies below. Depth increases
/// downward. Each layer contributes in closed form.
Eigen::VectorXd forward(const LayeredMedium& medium, const ToolSpec& tool);

/// Symmetric and directional kernels themselves, for checking.
double symmetric_kernel(double offset, double scale);
double directional_kernel(double offset, double scale);

struct WellCell {
  int column = 0;
  int row = 0;
};

/// Horizontal well of `count` cells at `row` starting at `first_column`.
std::vector<WellCell> horizontal_well(int row, int first_column, int count);

/// One measurement vector per well cell, in drilling order. The well must be
/// horizontal (constant row); throws InputError otherwise and BoundsError for
/// cells outside the grid.
std::vector<Eigen::VectorXd> simulate_log(const ResistivityGrid& res,
                                          const std::vector<WellCell>& well,
                                          const ToolSpec& tool);

/// Stack per-position vectors into one column vector, position-major.
Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& log);

}  // namespace geosteer
