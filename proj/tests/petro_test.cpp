#include <gtest/gtest.h>

#include <random>

#include "geosteer/errors.hpp"
#include "geosteer/generator.hpp"
#include "geosteer/petro.hpp"
#include "oracles.hpp"

using namespace geosteer;

namespace {

FaciesProbabilityGrid single_cell_grid(double bg, double ch, double cr) {
  GridGeometry g;
  g.nx = 1;
  g.nz = 1;
  FaciesProbabilityGrid grid(g);
  grid.at(0, 0, Facies::Background) = bg;
  grid.at(0, 0, Facies::Channel) = ch;
  grid.at(0, 0, Facies::Crevasse) = cr;
  return grid;
}

ResistivityGrid column_grid(const std::vector<double>& column) {
  GridGeometry g;
  g.nx = 1;
  g.nz = static_cast<int>(column.size());
  ResistivityGrid res(g);
  for (int r = 0; r < g.nz; ++r) res.at(r, 0) = column[static_cast<std::size_t>(r)];
  return res;
}

// Column of `runs` runs with random lengths, adjacent runs always different.
std::vector<double> random_column(std::mt19937_64& gen, int runs, int rows) {
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<int> cuts;
  std::uniform_int_distribution<int> cut(1, rows - 1);
  while (static_cast<int>(cuts.size()) < runs - 1) {
    const int c = cut(gen);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(rows);
  std::vector<double> col;
  int facies = pick(gen);
  int row = 0;
  for (int end : cuts) {
    for (; row < end; ++row) col.push_back(kFaciesResistivity[static_cast<std::size_t>(facies)]);
    int next = facies;
    while (next == facies) next = pick(gen);
    facies = next;
  }
  return col;
}

}  // namespace

TEST(DeriveResistivity, ArgmaxMapsToFaciesValues) {
  EXPECT_EQ(derive_resistivity(single_cell_grid(1, 0, 0)).at(0, 0), 220.0);
  EXPECT_EQ(derive_resistivity(single_cell_grid(0.2, 0.7, 0.1)).at(0, 0), 3.6);
  EXPECT_EQ(derive_resistivity(single_cell_grid(0.1, 0.2, 0.7)).at(0, 0), 4.1);
}

TEST(DeriveResistivity, TiesGoToLowestFaciesIndex) {
  EXPECT_EQ(derive_resistivity(single_cell_grid(0.5, 0.5, 0.0)).at(0, 0), 220.0);
  EXPECT_EQ(derive_resistivity(single_cell_grid(0.0, 0.5, 0.5)).at(0, 0), 3.6);
  EXPECT_EQ(argmax_facies({1.0 / 3, 1.0 / 3, 1.0 / 3}), 0);
}

TEST(DeriveResistivity, OnlyCanonicalValuesAppear) {
  const Eigen::MatrixXd draws = sample_prior({60, 1e-6, 2}, 20);
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    for (double v : derive_resistivity(generate(draws.col(j))).raw()) {
      ASSERT_TRUE(v == 220.0 || v == 3.6 || v == 4.1) << v;
    }
  }
}

TEST(ExtractLayers, UniformColumnIsOneLayer) {
  const auto res = column_grid(std::vector<double>(64, 3.6));
  const auto m = extract_layers(res, 0, 20);
  EXPECT_TRUE(m.boundaries.empty());
  ASSERT_EQ(m.resistivities.size(), 1u);
  EXPECT_EQ(m.resistivities[0], 3.6);
  EXPECT_DOUBLE_EQ(m.tool_tvd, 10.25);
}

TEST(ExtractLayers, TwoHalvesGiveOneCellEdgeBoundary) {
  std::vector<double> col(32, 220.0);
  col.resize(64, 3.6);
  const auto m = extract_layers(column_grid(col), 0, 31);
  ASSERT_EQ(m.boundaries.size(), 1u);
  EXPECT_DOUBLE_EQ(m.boundaries[0], 16.0);
  EXPECT_EQ(m.resistivities, (std::vector<double>{220.0, 3.6}));
  EXPECT_DOUBLE_EQ(m.tool_tvd, 15.75);
}

TEST(ExtractLayers, MatchesRunLengthOracleOnRandomColumns) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> row(0, 63);
  for (int trial = 0; trial < 200; ++trial) {
    const auto col = random_column(gen, 10, 64);
    const int tool = row(gen);
    const auto got = extract_layers(column_grid(col), 0, tool);
    const auto want = oracle::rle_layers(col, tool, 0.5);
    ASSERT_EQ(got.boundaries, want.boundaries) << "trial " << trial;
    ASSERT_EQ(got.resistivities, want.resistivities) << "trial " << trial;
    EXPECT_NO_THROW(validate(got));

    // Round trip inside the retained window.
    for (int r = want.first_row; r <= want.last_row; ++r) {
      ASSERT_EQ(got.resistivity_at((r + 0.5) * 0.5), col[static_cast<std::size_t>(r)]);
    }
  }
}

TEST(ExtractLayers, KeepsAtMostThreeNearestPerSide) {
  // Alternating two-row bands: many interfaces on each side of the tool.
  std::vector<double> col;
  for (int r = 0; r < 64; ++r) col.push_back((r / 2) % 2 ? 3.6 : 220.0);
  const auto m = extract_layers(column_grid(col), 0, 32);
  int above = 0;
  int below = 0;
  for (double b : m.boundaries) (b <= m.tool_tvd ? above : below)++;
  EXPECT_EQ(above, 3);
  EXPECT_EQ(below, 3);
  EXPECT_EQ(m.layer_count(), 7u);
  EXPECT_EQ(m.boundaries, (std::vector<double>{14.0, 15.0, 16.0, 17.0, 18.0, 19.0}));
}

TEST(ExtractLayers, UsesOnlyTheToolColumn) {
  GridGeometry g;
  g.nx = 3;
  g.nz = 8;
  ResistivityGrid res(g, 220.0);
  for (int r = 0; r < 8; ++r) res.at(r, 0) = 3.6;  // neighbour column differs
  const auto m = extract_layers(res, 1, 4);
  EXPECT_TRUE(m.boundaries.empty());
  EXPECT_EQ(m.resistivities[0], 220.0);
}

TEST(ExtractLayers, OutOfRangeIsBoundsError) {
  const auto res = column_grid(std::vector<double>(64, 3.6));
  EXPECT_THROW(extract_layers(res, 1, 0), BoundsError);
  EXPECT_THROW(extract_layers(res, -1, 0), BoundsError);
  EXPECT_THROW(extract_layers(res, 0, 64), BoundsError);
  EXPECT_THROW(extract_layers(res, 0, -1), BoundsError);
}

TEST(LayeredMedium, ValidateRejectsBrokenMedia) {
  EXPECT_THROW(validate(LayeredMedium{{}, {}, 0.0}), InputError);
  EXPECT_THROW(validate(LayeredMedium{{1.0}, {3.6}, 0.0}), InputError);
  EXPECT_THROW(validate(LayeredMedium{{2.0, 1.0}, {3.6, 220.0, 3.6}, 1.5}), InputError);
  EXPECT_THROW(validate(LayeredMedium{{1.0}, {3.6, 3.6}, 0.0}), InputError);
  EXPECT_THROW(validate(LayeredMedium{{1.0}, {3.6, -1.0}, 0.0}), InputError);
  EXPECT_THROW(validate(LayeredMedium{{1, 2, 3, 4}, {3.6, 220, 3.6, 220, 3.6}, 0.5}), InputError);
  EXPECT_NO_THROW(validate(LayeredMedium{{1.0, 2.0}, {3.6, 220.0, 3.6}, 1.5}));
}

TEST(LayeredMedium, BoundaryDepthBelongsToLayerBelow) {
  const LayeredMedium m{{1.0, 2.0}, {3.6, 220.0, 4.1}, 1.5};
  EXPECT_EQ(m.resistivity_at(0.99), 3.6);
  EXPECT_EQ(m.resistivity_at(1.0), 220.0);
  EXPECT_EQ(m.resistivity_at(2.0), 4.1);
  EXPECT_EQ(m.resistivity_at(-100.0), 3.6);
  EXPECT_EQ(m.resistivity_at(100.0), 4.1);
}
