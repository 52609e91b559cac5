#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geosteer/enrml.hpp"
#include "geosteer/grid.hpp"
#include "geosteer/harness.hpp"
#include "geosteer/mcmc.hpp"

namespace geosteer::io {

namespace fs = std::filesystem;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

/// Rows of `m` as CSV lines; `header` is written first when non-empty.
void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});
/// Reads a numeric CSV; a first line that does not parse as numbers is
/// treated as a header. Throws InputError for missing files or ragged rows.
Eigen::MatrixXd read_matrix_csv(const fs::path& path);

/// One line per position, 13 columns, header ch01..chNN.
void write_log_csv(const fs::path& path, const std::vector<Eigen::VectorXd>& log);
std::vector<Eigen::VectorXd> read_log_csv(const fs::path& path);

/// Three row-major sections (Background, Channel, Crevasse), each nz lines
/// of nx values, introduced by a "# <facies>" line.
void write_facies_csv(const fs::path& path, const FaciesProbabilityGrid& grid);
void write_resistivity_csv(const fs::path& path, const ResistivityGrid& grid);
/// {"nx": .., "nz": .., "dx": 10.0, "dz": 0.5, ...}
void write_grid_header(const fs::path& path, const GridGeometry& geom, const std::string& kind);

/// 8-bit binary graymap of `grid` mapped linearly from [lo, hi] to [0, 255].
/// Cells in `marks` are drawn white with a black center pixel column so
/// measurement positions stand out. Each cell is scaled to `cell_w` x `cell_h`.
void write_pgm(const fs::path& path, const ResistivityGrid& grid, double lo, double hi,
               const std::vector<WellCell>& marks, int cell_w = 4, int cell_h = 2);

std::string config_to_json(const ExperimentConfig& cfg);
/// Accepts a bare config or a manifest carrying a "config" object.
ExperimentConfig config_from_json(const std::string& text);

std::string tool_to_json(const ToolSpec& tool);
ToolSpec tool_from_json(const std::string& text);

/// One JSON object per line: iteration, lambda, misfit, accepted, relative_change, rank.
std::string enrml_log_jsonl(const EnrmlResult& result);

/// Chain checkpoint: the restartable state (JSON, bit-exact doubles and RNG
/// state) plus the recorded history (CSV: log posterior then parameters).
std::string chain_state_json(const ChainState& state, const ChainHistory& history);
void chain_state_from_json(const std::string& text, ChainState& state, ChainHistory& history);
void write_history_csv(const fs::path& path, const ChainHistory& history);
void read_history_csv(const fs::path& path, ChainHistory& history);

}  // namespace geosteer::io
