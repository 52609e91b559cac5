#include "geosteer/petro.hpp"

#include <algorithm>
#include <cmath>

#include "geosteer/errors.hpp"

namespace geosteer {

double LayeredMedium::resistivity_at(double z) const {
  const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), z);
  return resistivities[static_cast<std::size_t>(it - boundaries.begin())];
}

int argmax_facies(const std::array<double, kFaciesCount>& p) {
  int best = 0;
  for (int f = 1; f < kFaciesCount; ++f) {
    if (p[f] > p[best]) best = f;
  }
  return best;
}

ResistivityGrid derive_resistivity(const FaciesProbabilityGrid& grid) {
  const auto& g = grid.geometry();
  ResistivityGrid out(g);
  for (int r = 0; r < g.nz; ++r) {
    for (int c = 0; c < g.nx; ++c) {
      out.at(r, c) = kFaciesResistivity[static_cast<std::size_t>(argmax_facies(grid.cell(r, c)))];
    }
  }
  return out;
}

LayeredMedium extract_layers(const ResistivityGrid& res, int column, int tool_row) {
  const auto& g = res.geometry();
  if (!g.contains(column, tool_row)) {
    throw BoundsError("extract_layers: cell (" + std::to_string(column) + ", " +
                      std::to_string(tool_row) + ") outside grid");
  }

  // Rows r where a run ends: value(r-1) != value(r). The boundary is the top edge of row r.
  std::vector<int> above;  // edges with row <= tool_row, nearest first
  std::vector<int> below;  // edges with row > tool_row, nearest first
  for (int r = tool_row; r >= 1 && static_cast<int>(above.size()) < kMaxBoundariesPerSide; --r) {
    if (res.at(r - 1, column) != res.at(r, column)) above.push_back(r);
  }
  for (int r = tool_row + 1; r < g.nz && static_cast<int>(below.size()) < kMaxBoundariesPerSide;
       ++r) {
    if (res.at(r - 1, column) != res.at(r, column)) below.push_back(r);
  }

  LayeredMedium m;
  m.tool_tvd = (tool_row + 0.5) * g.dz;
  std::vector<int> edges(above.rbegin(), above.rend());
  edges.insert(edges.end(), below.begin(), below.end());

  // Top layer takes the value just above the first edge (or the tool cell when there is none).
  m.resistivities.push_back(edges.empty() ? res.at(tool_row, column) : res.at(edges.front() - 1, column));
  for (int e : edges) {
    m.boundaries.push_back(e * g.dz);
    m.resistivities.push_back(res.at(e, column));
  }
  return m;
}

void validate(const LayeredMedium& medium) {
  const auto& b = medium.boundaries;
  const auto& r = medium.resistivities;
  if (r.empty()) throw InputError("layered medium has no layers");
  if (r.size() != b.size() + 1) throw InputError("layer count must equal boundary count + 1");
  if (r.size() > 2 * kMaxBoundariesPerSide + 1) throw InputError("more than seven layers");
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (!(b[i] > b[i - 1])) throw InputError("boundaries must be strictly increasing");
  }
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i] == r[i - 1]) throw InputError("adjacent layers share a resistivity");
  }
  for (double v : r) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("layer resistivity must be positive");
  }
  const auto n_above = std::count_if(b.begin(), b.end(), [&](double z) { return z < medium.tool_tvd; });
  const auto n_below = static_cast<std::ptrdiff_t>(b.size()) - n_above;
  if (n_above > kMaxBoundariesPerSide || n_below > kMaxBoundariesPerSide) {
    throw InputError("more than three boundaries on one side of the tool");
  }
}

}  // namespace geosteer
