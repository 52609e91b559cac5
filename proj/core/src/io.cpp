#include "geosteer/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "geosteer/errors.hpp"

namespace geosteer::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::string field = line.substr(pos, end - pos);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t lead = 0;
    while (lead < field.size() && field[lead] == ' ') ++lead;
    double v = 0.0;
    const char* first = field.data() + lead;
    const char* last = field.data() + field.size();
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last) return false;
    out.push_back(v);
    pos = end + 1;
  }
  return !out.empty();
}

std::string join_row(const double* values, Eigen::Index n, Eigen::Index stride) {
  std::string line;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) line += ',';
    line += format_double(values[i * stride]);
  }
  return line;
}

}  // namespace

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header) {
  std::string text;
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
    text += '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) text += ',';
      text += format_double(m(r, c));
    }
    text += '\n';
  }
  write_text(path, text);
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError("non-numeric CSV line in " + path.string());
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("ragged CSV in " + path.string());
    }
    rows.push_back(row);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

void write_log_csv(const fs::path& path, const std::vector<Eigen::VectorXd>& log) {
  if (log.empty()) throw InputError("write_log_csv: empty log");
  std::vector<std::string> header;
  char name[16];
  for (Eigen::Index k = 0; k < log.front().size(); ++k) {
    std::snprintf(name, sizeof(name), "ch%02d", static_cast<int>(k + 1));
    header.emplace_back(name);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(log.size()), log.front().size());
  for (std::size_t i = 0; i < log.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = log[i].transpose();
  write_matrix_csv(path, m, header);
}

std::vector<Eigen::VectorXd> read_log_csv(const fs::path& path) {
  const Eigen::MatrixXd m = read_matrix_csv(path);
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).transpose());
  return out;
}

void write_facies_csv(const fs::path& path, const FaciesProbabilityGrid& grid) {
  const auto& g = grid.geometry();
  static const char* names[kFaciesCount] = {"Background", "Channel", "Crevasse"};
  std::string text;
  std::vector<double> row(static_cast<std::size_t>(g.nx));
  for (int f = 0; f < kFaciesCount; ++f) {
    text += std::string("# ") + names[f] + '\n';
    for (int r = 0; r < g.nz; ++r) {
      for (int c = 0; c < g.nx; ++c) row[static_cast<std::size_t>(c)] = grid.at(r, c, static_cast<Facies>(f));
      text += join_row(row.data(), g.nx, 1) + '\n';
    }
  }
  write_text(path, text);
}

void write_resistivity_csv(const fs::path& path, const ResistivityGrid& grid) {
  const auto& g = grid.geometry();
  std::string text;
  for (int r = 0; r < g.nz; ++r) {
    text += join_row(grid.raw().data() + static_cast<std::size_t>(r) * g.nx, g.nx, 1) + '\n';
  }
  write_text(path, text);
}

void write_grid_header(const fs::path& path, const GridGeometry& geom, const std::string& kind) {
  json j = {{"kind", kind},       {"nx", geom.nx},    {"nz", geom.nz},
            {"dx", geom.dx},      {"dz", geom.dz},    {"layout", "row-major, row 0 at grid top"}};
  if (kind == "facies") j["sections"] = {"Background", "Channel", "Crevasse"};
  write_text(path, j.dump(2) + "\n");
}

void write_pgm(const fs::path& path, const ResistivityGrid& grid, double lo, double hi,
               const std::vector<WellCell>& marks, int cell_w, int cell_h) {
  const auto& g = grid.geometry();
  const int w = g.nx * cell_w;
  const int h = g.nz * cell_h;
  std::string pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), '\0');
  const double span = hi > lo ? hi - lo : 1.0;
  for (int r = 0; r < g.nz; ++r) {
    for (int c = 0; c < g.nx; ++c) {
      double v = grid.at(r, c);
      double t = std::isfinite(v) ? (v - lo) / span : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const auto level = static_cast<unsigned char>(std::lround(t * 254.0));
      for (int y = 0; y < cell_h; ++y) {
        for (int x = 0; x < cell_w; ++x) {
          pixels[static_cast<std::size_t>((r * cell_h + y) * w + c * cell_w + x)] =
              static_cast<char>(level);
        }
      }
    }
  }
  for (const auto& m : marks) {
    if (!g.contains(m.column, m.row)) continue;
    for (int y = 0; y < cell_h; ++y) {
      for (int x = 0; x < cell_w; ++x) {
        const bool center = x == cell_w / 2;
        pixels[static_cast<std::size_t>((m.row * cell_h + y) * w + m.column * cell_w + x)] =
            static_cast<char>(center ? 0 : 255);
      }
    }
  }
  write_text(path, "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n" + pixels);
}

namespace {

const char* kind_name(ChannelKind k) { return k == ChannelKind::Symmetric ? "symmetric" : "directional"; }

json tool_json(const ToolSpec& tool) {
  json ch = json::array();
  for (const auto& c : tool.channels) ch.push_back({{"kind", kind_name(c.kind)}, {"scale", c.scale}});
  return {{"channels", ch}};
}

ToolSpec tool_from(const json& j) {
  ToolSpec t;
  for (const auto& c : j.at("channels")) {
    const std::string kind = c.at("kind").get<std::string>();
    if (kind != "symmetric" && kind != "directional") {
      throw ConfigError("unknown channel kind '" + kind + "'");
    }
    t.channels.push_back({kind == "symmetric" ? ChannelKind::Symmetric : ChannelKind::Directional,
                          c.at("scale").get<double>()});
  }
  validate(t);
  return t;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string tool_to_json(const ToolSpec& tool) { return tool_json(tool).dump(2) + "\n"; }

ToolSpec tool_from_json(const std::string& text) {
  try {
    return tool_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("tool spec: ") + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const auto& g = cfg.generator;
  json j;
  j["seed"] = cfg.seed;
  j["prior_variance"] = cfg.prior_variance;
  j["generator"] = {{"nx", g.grid.nx},
                    {"nz", g.grid.nz},
                    {"dx", g.grid.dx},
                    {"dz", g.grid.dz},
                    {"bodies", g.bodies},
                    {"latent_scale", g.latent_scale},
                    {"clamp_sigma", g.clamp_sigma},
                    {"falloff_rows", g.falloff_rows},
                    {"falloff_cols", g.falloff_cols},
                    {"thickness_rows", g.thickness_rows},
                    {"thickness_sd_rows", g.thickness_sd_rows},
                    {"half_length_cols", g.half_length_cols},
                    {"half_length_log_sd", g.half_length_log_sd},
                    {"depth_sd_rows", g.depth_sd_rows},
                    {"lateral_sd_cols", g.lateral_sd_cols},
                    {"undulation_rows", g.undulation_rows},
                    {"wavelength_cols", g.wavelength_cols},
                    {"eccentricity", g.eccentricity},
                    {"crevasse_reach_cols", g.crevasse_reach_cols},
                    {"crevasse_thickness_rows", g.crevasse_thickness_rows},
                    {"presence_bias", g.presence_bias},
                    {"presence_gain", g.presence_gain}};
  j["well"] = {{"row", cfg.well.row}, {"first_column", cfg.well.first_column}, {"count", cfg.well.count}};
  j["noise"] = {{"rel_std", cfg.noise.rel_std},
                {"floor", cfg.noise.floor},
                {"corr_len_factor", cfg.noise.corr_len_factor}};
  j["tool"] = tool_json(cfg.tool);
  j["ensemble_size"] = cfg.ensemble_size;
  j["enrml"] = {{"lambda0", cfg.enrml.lambda0},
                {"lambda_up", cfg.enrml.lambda_up},
                {"lambda_down", cfg.enrml.lambda_down},
                {"svd_energy", cfg.enrml.svd_energy},
                {"conv_tol", cfg.enrml.conv_tol},
                {"max_iter", cfg.enrml.max_iter},
                {"max_rejections", cfg.enrml.max_rejections},
                {"localization", cfg.enrml.localization ? json(*cfg.enrml.localization) : json(nullptr)}};
  json q = nullptr;
  if (cfg.mcmc.q_diagonal) q = std::vector<double>(cfg.mcmc.q_diagonal->begin(), cfg.mcmc.q_diagonal->end());
  j["mcmc"] = {{"chains", cfg.mcmc.chains},
               {"iters", cfg.mcmc.iters},
               {"thin", cfg.mcmc.thin},
               {"beta", cfg.mcmc.beta},
               {"record_stride", cfg.mcmc.record_stride},
               {"psrf_points", cfg.mcmc.psrf_points},
               {"q_diagonal", q},
               {"adaptation", "persistent"}};
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig cfg;
  try {
    json j = json::parse(text);
    if (j.contains("config")) j = j.at("config");
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "prior_variance", cfg.prior_variance);
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      auto& o = cfg.generator;
      read_opt(g, "nx", o.grid.nx);
      read_opt(g, "nz", o.grid.nz);
      read_opt(g, "dx", o.grid.dx);
      read_opt(g, "dz", o.grid.dz);
      read_opt(g, "bodies", o.bodies);
      read_opt(g, "latent_scale", o.latent_scale);
      read_opt(g, "clamp_sigma", o.clamp_sigma);
      read_opt(g, "falloff_rows", o.falloff_rows);
      read_opt(g, "falloff_cols", o.falloff_cols);
      read_opt(g, "thickness_rows", o.thickness_rows);
      read_opt(g, "thickness_sd_rows", o.thickness_sd_rows);
      read_opt(g, "half_length_cols", o.half_length_cols);
      read_opt(g, "half_length_log_sd", o.half_length_log_sd);
      read_opt(g, "depth_sd_rows", o.depth_sd_rows);
      read_opt(g, "lateral_sd_cols", o.lateral_sd_cols);
      read_opt(g, "undulation_rows", o.undulation_rows);
      read_opt(g, "wavelength_cols", o.wavelength_cols);
      read_opt(g, "eccentricity", o.eccentricity);
      read_opt(g, "crevasse_reach_cols", o.crevasse_reach_cols);
      read_opt(g, "crevasse_thickness_rows", o.crevasse_thickness_rows);
      read_opt(g, "presence_bias", o.presence_bias);
      read_opt(g, "presence_gain", o.presence_gain);
    }
    if (j.contains("well")) {
      const auto& w = j.at("well");
      read_opt(w, "row", cfg.well.row);
      read_opt(w, "first_column", cfg.well.first_column);
      read_opt(w, "count", cfg.well.count);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      read_opt(n, "rel_std", cfg.noise.rel_std);
      read_opt(n, "floor", cfg.noise.floor);
      read_opt(n, "corr_len_factor", cfg.noise.corr_len_factor);
    }
    if (j.contains("tool")) cfg.tool = tool_from(j.at("tool"));
    read_opt(j, "ensemble_size", cfg.ensemble_size);
    if (j.contains("enrml")) {
      const auto& e = j.at("enrml");
      read_opt(e, "lambda0", cfg.enrml.lambda0);
      read_opt(e, "lambda_up", cfg.enrml.lambda_up);
      read_opt(e, "lambda_down", cfg.enrml.lambda_down);
      read_opt(e, "svd_energy", cfg.enrml.svd_energy);
      read_opt(e, "conv_tol", cfg.enrml.conv_tol);
      read_opt(e, "max_iter", cfg.enrml.max_iter);
      read_opt(e, "max_rejections", cfg.enrml.max_rejections);
      if (e.contains("localization") && !e.at("localization").is_null()) {
        cfg.enrml.localization = e.at("localization").get<double>();
      }
    }
    if (j.contains("mcmc")) {
      const auto& m = j.at("mcmc");
      read_opt(m, "chains", cfg.mcmc.chains);
      read_opt(m, "iters", cfg.mcmc.iters);
      read_opt(m, "thin", cfg.mcmc.thin);
      read_opt(m, "beta", cfg.mcmc.beta);
      read_opt(m, "record_stride", cfg.mcmc.record_stride);
      read_opt(m, "psrf_points", cfg.mcmc.psrf_points);
      if (m.contains("q_diagonal") && !m.at("q_diagonal").is_null()) {
        const auto q = m.at("q_diagonal").get<std::vector<double>>();
        cfg.mcmc.q_diagonal = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string enrml_log_jsonl(const EnrmlResult& result) {
  std::string out;
  for (const auto& r : result.log) {
    json j = {{"iteration", r.iteration},
              {"lambda", r.lambda},
              {"misfit", r.misfit},
              {"accepted", r.accepted},
              {"relative_change", r.relative_change},
              {"rank", r.rank}};
    out += j.dump() + "\n";
  }
  json end = {{"converged", result.converged}, {"accepted_iterations", result.accepted}};
  out += end.dump() + "\n";
  return out;
}

namespace {

std::vector<double> to_vec(const Eigen::MatrixXd& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace

std::string chain_state_json(const ChainState& state, const ChainHistory& history) {
  const auto& p = state.proposal;
  json j = {{"current", to_vec(state.current)},
            {"log_posterior", state.log_posterior},
            {"iteration", state.iteration},
            {"accepted", state.accepted},
            {"rng", state.rng.save()},
            {"proposal",
             {{"beta", p.beta()},
              {"q_diagonal", to_vec(p.q_diagonal())},
              {"count", p.history_count()},
              {"mean", to_vec(p.running_mean())},
              {"scatter", to_vec(p.scatter())},
              {"fallbacks", p.fallbacks()}}},
            {"history", {{"stride", history.stride}, {"recorded", history.samples.cols()}}}};
  return j.dump() + "\n";
}

void chain_state_from_json(const std::string& text, ChainState& state, ChainHistory& history) {
  try {
    const json j = json::parse(text);
    const auto cur = j.at("current").get<std::vector<double>>();
    const auto n = static_cast<Eigen::Index>(cur.size());
    state.current = Eigen::Map<const Eigen::VectorXd>(cur.data(), n);
    state.log_posterior = j.at("log_posterior").get<double>();
    state.iteration = j.at("iteration").get<std::int64_t>();
    state.accepted = j.at("accepted").get<std::int64_t>();
    state.rng.load(j.at("rng").get<std::string>());
    const auto& p = j.at("proposal");
    const auto q = p.at("q_diagonal").get<std::vector<double>>();
    const auto mean = p.at("mean").get<std::vector<double>>();
    const auto scatter = p.at("scatter").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(q.size()) != n || static_cast<Eigen::Index>(mean.size()) != n ||
        static_cast<Eigen::Index>(scatter.size()) != n * n) {
      throw InputError("checkpoint: inconsistent dimensions");
    }
    state.proposal = AdaptiveProposal(p.at("beta").get<double>(),
                                      Eigen::Map<const Eigen::VectorXd>(q.data(), n));
    state.proposal.restore(p.at("count").get<std::int64_t>(),
                           Eigen::Map<const Eigen::VectorXd>(mean.data(), n),
                           Eigen::Map<const Eigen::MatrixXd>(scatter.data(), n, n),
                           p.at("fallbacks").get<std::int64_t>());
    history.stride = j.at("history").at("stride").get<int>();
    history.iterations = state.iteration;
    history.accepted = state.accepted;
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
}

void write_history_csv(const fs::path& path, const ChainHistory& history) {
  const Eigen::Index d = history.samples.rows();
  Eigen::MatrixXd m(history.samples.cols(), d + 1);
  m.col(0) = history.log_posteriors;
  m.rightCols(d) = history.samples.transpose();
  std::vector<std::string> header{"log_posterior"};
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("m" + std::to_string(i + 1));
  write_matrix_csv(path, m, header);
}

void read_history_csv(const fs::path& path, ChainHistory& history) {
  const Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.cols() < 2) throw InputError("history CSV has too few columns");
  history.log_posteriors = m.col(0);
  history.samples = m.rightCols(m.cols() - 1).transpose();
}

}  // namespace geosteer::io
