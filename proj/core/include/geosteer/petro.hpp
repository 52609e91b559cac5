#pragma once

#include <array>
#include <vector>

#include "geosteer/grid.hpp"

namespace geosteer {

/// Resistivity (Ohm m) assigned to each facies, indexed by Facies.
inline constexpr std::array<double, kFaciesCount> kFaciesResistivity{220.0, 3.6, 4.1};

/// Isotropic 1D layering around the tool at one well position.
///
/// `boundaries` are absolute true vertical depths (m, increasing downward);
/// `resistivities` lists the layers top to bottom, so it always holds one
/// more entry than `boundaries`. The outermost layers extend to infinity.
struct LayeredMedium {
  std::vector<double> boundaries;
  std::vector<double> resistivities;
  double tool_tvd = 0.0;

  std::size_t layer_count() const { return resistivities.size(); }
  /// Resistivity at depth z; a depth exactly on a boundary belongs to the layer below.
  double resistivity_at(double z) const;
};

inline constexpr int kMaxBoundariesPerSide = 3;

/// Most probable facies per cell mapped to its resistivity. Ties go to the
/// lowest facies index.
ResistivityGrid derive_resistivity(const FaciesProbabilityGrid& grid);

/// Facies index picked by derive_resistivity for one cell.
int argmax_facies(const std::array<double, kFaciesCount>& p);

/// Layers seen by a tool sitting in cell (tool_row, column). Only the tool's
/// own column is used. Boundaries lie on cell edges; at most three are kept
/// on each side of the tool (the nearest ones), and the outermost retained
/// layer on each side extends to infinity. Throws BoundsError for indices
/// outside the grid.
LayeredMedium extract_layers(const ResistivityGrid& res, int column, int tool_row);

/// Throws InputError if the medium breaks its invariants (ordering, tool
/// placement, adjacent equal layers, layer count).
void validate(const LayeredMedium& medium);

}  // namespace geosteer
