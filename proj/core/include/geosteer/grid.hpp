#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace geosteer {

/// Section geometry shared by every grid: columns run along the well,
/// rows run down in true vertical depth from the grid top.
struct GridGeometry {
  int nx = 64;
  int nz = 64;
  double dx = 10.0;  // m per column
  double dz = 0.5;   // m per row

  double width() const { return nx * dx; }
  double height() const { return nz * dz; }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(nz); }
  bool contains(int col, int row) const { return col >= 0 && col < nx && row >= 0 && row < nz; }

  bool operator==(const GridGeometry&) const = default;
};

enum class Facies : int { Background = 0, Channel = 1, Crevasse = 2 };
inline constexpr int kFaciesCount = 3;

/// Soft one-hot facies probabilities, one simplex per cell.
class FaciesProbabilityGrid {
 public:
  FaciesProbabilityGrid() = default;
  explicit FaciesProbabilityGrid(GridGeometry geom)
      : geom_(geom), data_(geom.cells() * kFaciesCount, 0.0) {}

  const GridGeometry& geometry() const { return geom_; }

  double& at(int row, int col, Facies f) { return data_[index(row, col, f)]; }
  double at(int row, int col, Facies f) const { return data_[index(row, col, f)]; }

  std::array<double, kFaciesCount> cell(int row, int col) const {
    return {at(row, col, Facies::Background), at(row, col, Facies::Channel),
            at(row, col, Facies::Crevasse)};
  }

  const std::vector<double>& raw() const { return data_; }

  bool operator==(const FaciesProbabilityGrid&) const = default;

 private:
  std::size_t index(int row, int col, Facies f) const {
    return (static_cast<std::size_t>(f) * geom_.nz + static_cast<std::size_t>(row)) * geom_.nx +
           static_cast<std::size_t>(col);
  }

  GridGeometry geom_;
  std::vector<double> data_;
};

/// Per-cell resistivity in Ohm m, row-major.
class ResistivityGrid {
 public:
  ResistivityGrid() = default;
  explicit ResistivityGrid(GridGeometry geom, double fill = 0.0)
      : geom_(geom), data_(geom.cells(), fill) {}

  const GridGeometry& geometry() const { return geom_; }

  double& at(int row, int col) { return data_[index(row, col)]; }
  double at(int row, int col) const { return data_[index(row, col)]; }

  const std::vector<double>& raw() const { return data_; }

  bool operator==(const ResistivityGrid&) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * geom_.nx + static_cast<std::size_t>(col);
  }

  GridGeometry geom_;
  std::vector<double> data_;
};

}  // namespace geosteer
