#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "geosteer/errors.hpp"
#include "geosteer/harness.hpp"
#include "geosteer/io.hpp"
#include "geosteer/petro.hpp"

namespace geosteer::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::uint64_t seed = 1;
  std::string config;
  std::string out;
  int n = 0;
  int chains = 0;
  std::int64_t iters = 0;
  int thin = 0;
  double localize = 0.0;
  bool paper_scale = false;
  std::string method;
  int count = 10;
  bool checkpoint = false;
  bool resume = false;
};

struct Given {
  CLI::Option* seed = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* chains = nullptr;
  CLI::Option* iters = nullptr;
  CLI::Option* thin = nullptr;
  CLI::Option* localize = nullptr;
  CLI::Option* method = nullptr;
  CLI::Option* count = nullptr;
};

/// Files written by one command, in write order, with a content digest so a
/// manifest pins the exact bytes.
class RunDir {
 public:
  explicit RunDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  fs::path path(const std::string& name) const { return root_ / name; }
  fs::path require(const std::string& name) const {
    const fs::path p = root_ / name;
    if (!fs::exists(p)) throw InputError("missing input " + p.string() + " (run the producing command first)");
    inputs_.push_back(name);
    return p;
  }
  void wrote(const std::string& name) { outputs_.push_back(name); }

  json inputs_json() const { return digests(inputs_); }
  json outputs_json() const { return digests(outputs_); }

 private:
  json digests(const std::vector<std::string>& names) const {
    json j = json::object();
    for (const auto& n : names) j[n] = fnv1a(io::read_text(root_ / n));
    return j;
  }
  static std::string fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    std::ostringstream ss;
    ss << std::hex << h;
    return ss.str();
  }

  fs::path root_;
  mutable std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

ExperimentConfig load_config(const Flags& f, const Given& g) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = io::config_from_json(io::read_text(f.config));
  if (f.paper_scale) cfg.apply_paper_scale();
  if (g.seed->count()) cfg.seed = f.seed;
  if (g.n->count()) cfg.ensemble_size = f.n;
  if (g.chains->count()) cfg.mcmc.chains = f.chains;
  if (g.iters->count()) cfg.mcmc.iters = f.iters;
  if (g.thin->count()) cfg.mcmc.thin = f.thin;
  if (g.localize->count()) cfg.enrml.localization = f.localize;
  // Keep the diagnostic stride compatible with an overridden thinning.
  if ((g.thin->count() || g.iters->count()) &&
      (cfg.mcmc.thin % cfg.mcmc.record_stride != 0 ||
       (cfg.mcmc.iters / 2) % cfg.mcmc.record_stride != 0)) {
    cfg.mcmc.record_stride = 1;
  }
  cfg.validate();
  return cfg;
}

/// Values the manifest carries besides the config (method, draw count).
json manifest_args(const Flags& f) {
  json j;
  if (!f.config.empty()) {
    const json m = json::parse(io::read_text(f.config));
    if (m.contains("args")) j = m.at("args");
  }
  return j.is_object() ? j : json::object();
}

std::string pick_method(const Flags& f, const Given& g) {
  std::string m = f.method;
  if (!g.method->count()) {
    const json a = manifest_args(f);
    if (a.contains("method")) m = a.at("method").get<std::string>();
  }
  if (m != "enrml" && m != "mcmc") throw ConfigError("--method must be enrml or mcmc");
  return m;
}

/// Written as manifest_<command>.json, or manifest_<command>_<variant>.json
/// for commands run once per method.
void write_manifest(RunDir& dir, const std::string& command, const ExperimentConfig& cfg,
                    const json& args, const std::string& variant = {}) {
  json seeds = {{"experiment", cfg.seed}, {"mcmc_chains", cfg.mcmc_config().seed}};
  json streams = json::object();
  for (auto [name, s] : std::map<std::string, Stream>{{"truth", Stream::Truth},
                                                      {"prior_ensemble", Stream::PriorEnsemble},
                                                      {"observation_noise", Stream::ObservationNoise},
                                                      {"perturbations", Stream::Perturbations},
                                                      {"mcmc", Stream::Mcmc},
                                                      {"stats_prior", Stream::StatsPrior},
                                                      {"prior_draws", Stream::PriorDraws}}) {
    streams[name] = static_cast<std::uint64_t>(s);
  }
  seeds["streams"] = streams;
  json m = {{"command", command},
            {"version", GEOSTEER_VERSION},
            {"args", args},
            {"config", json::parse(io::config_to_json(cfg))},
            {"seeds", seeds},
            {"inputs", dir.inputs_json()},
            {"outputs", dir.outputs_json()}};
  const std::string stem = variant.empty() ? command : command + "_" + variant;
  io::write_text(dir.path("manifest_" + stem + ".json"), m.dump(2) + "\n");
}

Eigen::MatrixXd members_as_rows(const Eigen::MatrixXd& cols) { return cols.transpose(); }

std::vector<std::string> latent_header(Eigen::Index dim) {
  std::vector<std::string> h;
  for (Eigen::Index i = 0; i < dim; ++i) h.push_back("m" + std::to_string(i + 1));
  return h;
}

void write_members(RunDir& dir, const std::string& name, const Eigen::MatrixXd& cols) {
  io::write_matrix_csv(dir.path(name), members_as_rows(cols), latent_header(cols.rows()));
  dir.wrote(name);
}

Eigen::MatrixXd read_members(const RunDir& dir, const std::string& name, const ExperimentConfig& cfg) {
  Eigen::MatrixXd rows = io::read_matrix_csv(dir.require(name));
  if (rows.cols() != cfg.generator.latent_dim()) {
    throw InputError(name + ": expected " + std::to_string(cfg.generator.latent_dim()) + " columns");
  }
  return rows.transpose();
}

void write_grids(RunDir& dir, const std::string& stem, const FaciesProbabilityGrid& facies,
                 const ResistivityGrid& res) {
  io::write_facies_csv(dir.path(stem + "_facies.csv"), facies);
  dir.wrote(stem + "_facies.csv");
  io::write_grid_header(dir.path(stem + "_facies.json"), facies.geometry(), "facies");
  dir.wrote(stem + "_facies.json");
  io::write_resistivity_csv(dir.path(stem + "_resistivity.csv"), res);
  dir.wrote(stem + "_resistivity.csv");
  io::write_grid_header(dir.path(stem + "_resistivity.json"), res.geometry(), "resistivity");
  dir.wrote(stem + "_resistivity.json");
}

ResistivityGrid read_grid(const RunDir& dir, const std::string& name, const GridGeometry& geom) {
  const Eigen::MatrixXd m = io::read_matrix_csv(dir.require(name));
  if (m.rows() != geom.nz || m.cols() != geom.nx) throw InputError(name + ": wrong grid shape");
  ResistivityGrid g(geom);
  for (int r = 0; r < geom.nz; ++r) {
    for (int c = 0; c < geom.nx; ++c) g.at(r, c) = m(r, c);
  }
  return g;
}

/// Observations as saved by `simulate`; C_d is rebuilt from the clean log.
SyntheticData read_observations(const RunDir& dir, const ExperimentConfig& cfg) {
  SyntheticData data;
  data.clean = io::read_log_csv(dir.require("clean_log.csv"));
  const auto observed = io::read_log_csv(dir.require("observed_log.csv"));
  if (data.clean.size() != observed.size() ||
      data.clean.size() != static_cast<std::size_t>(cfg.well.count)) {
    throw InputError("observation logs do not match the configured well");
  }
  data.cd = build_noise_covariance(data.clean, cfg.noise);
  data.observed = stack(observed);
  return data;
}

int cmd_generate(const Flags& f, const Given& g, std::ostream& out) {
  ExperimentConfig cfg = load_config(f, g);
  int count = f.count;
  if (!g.count->count()) {
    const json a = manifest_args(f);
    if (a.contains("count")) count = a.at("count").get<int>();
  }
  RunDir dir(f.out);
  Rng rng = stream_for(cfg, Stream::PriorDraws);
  const Eigen::MatrixXd draws = sample_prior(cfg.prior(), count, rng);
  write_members(dir, "prior_latent.csv", draws);
  json fractions = json::array();
  for (int j = 0; j < count; ++j) {
    const auto facies = generate(draws.col(j), cfg.generator);
    const auto res = derive_resistivity(facies);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "prior_%03d", j);
    write_grids(dir, stem, facies, res);
    fractions.push_back({facies_fraction(facies, Facies::Background),
                         facies_fraction(facies, Facies::Channel),
                         facies_fraction(facies, Facies::Crevasse)});
  }
  io::write_text(dir.path("prior_fractions.json"), json{{"columns", {"background", "channel", "crevasse"}},
                                                        {"fractions", fractions}}.dump(2) + "\n");
  dir.wrote("prior_fractions.json");
  write_manifest(dir, "generate", cfg, {{"count", count}});
  out << "generated " << count << " prior realizations in " << f.out << "\n";
  return 0;
}

int cmd_truth(const Flags& f, const Given& g, std::ostream& out) {
  const ExperimentConfig cfg = load_config(f, g);
  RunDir dir(f.out);
  const Truth t = make_truth(cfg);
  write_members(dir, "truth_latent.csv", t.latent);
  write_grids(dir, "truth", t.facies, t.resistivity);
  write_manifest(dir, "truth", cfg, json::object());
  out << "truth: channel fraction " << facies_fraction(t.facies, Facies::Channel) << "\n";
  return 0;
}

int cmd_simulate(const Flags& f, const Given& g, std::ostream& out) {
  const ExperimentConfig cfg = load_config(f, g);
  RunDir dir(f.out);
  Truth t;
  t.latent = read_members(dir, "truth_latent.csv", cfg).col(0);
  t.facies = generate(t.latent, cfg.generator);
  t.resistivity = derive_resistivity(t.facies);
  const SyntheticData data = simulate_observations(t, cfg);
  io::write_log_csv(dir.path("clean_log.csv"), data.clean);
  dir.wrote("clean_log.csv");
  std::vector<Eigen::VectorXd> observed;
  const Eigen::Index nch = static_cast<Eigen::Index>(cfg.tool.size());
  for (std::size_t p = 0; p < data.clean.size(); ++p) {
    observed.emplace_back(data.observed.segment(static_cast<Eigen::Index>(p) * nch, nch));
  }
  io::write_log_csv(dir.path("observed_log.csv"), observed);
  dir.wrote("observed_log.csv");
  // Blocks stacked vertically: position p occupies rows [13p, 13p + 13).
  Eigen::MatrixXd blocks(data.cd.dim(), nch);
  for (std::size_t b = 0; b < data.cd.block_count(); ++b) {
    blocks.middleRows(data.cd.block_offset(b), nch) = data.cd.block(b);
  }
  io::write_matrix_csv(dir.path("noise_cov_blocks.csv"), blocks);
  dir.wrote("noise_cov_blocks.csv");
  io::write_text(dir.path("tool.json"), io::tool_to_json(cfg.tool));
  dir.wrote("tool.json");
  write_manifest(dir, "simulate", cfg, json::object());
  out << "simulated " << data.clean.size() << " positions x " << nch << " channels\n";
  return 0;
}

int cmd_invert_enrml(const Flags& f, const Given& g, std::ostream& out) {
  const ExperimentConfig cfg = load_config(f, g);
  RunDir dir(f.out);
  const SyntheticData data = read_observations(dir, cfg);
  const ObservationModel obs = build_observation_model(data, cfg);
  Rng rng = stream_for(cfg, Stream::PriorEnsemble);
  const Eigen::MatrixXd prior = sample_prior(cfg.prior(), cfg.ensemble_size, rng);
  const EnrmlResult res = run_enrml(prior, obs, pipeline_forward(cfg), cfg.enrml);
  write_members(dir, "enrml_prior.csv", prior);
  write_members(dir, "enrml_posterior.csv", res.ensemble);
  io::write_text(dir.path("enrml_log.jsonl"), io::enrml_log_jsonl(res));
  dir.wrote("enrml_log.jsonl");
  write_manifest(dir, "invert-enrml", cfg, json::object());
  out << "enrml: " << (res.converged ? "converged" : "not converged") << " after "
      << res.log.size() - 1 << " iterations, misfit " << res.log.front().misfit << " -> "
      << std::min_element(res.log.begin(), res.log.end(),
                          [](const auto& a, const auto& b) { return a.misfit < b.misfit; })
             ->misfit
      << "\n";
  return res.converged ? 0 : 3;
}

int cmd_invert_mcmc(const Flags& f, const Given& g, std::ostream& out) {
  const ExperimentConfig cfg = load_config(f, g);
  RunDir dir(f.out);
  const SyntheticData data = read_observations(dir, cfg);
  const TargetDensity target = build_target(data, cfg);
  const McmcConfig mc = cfg.mcmc_config();
  McmcResult res;
  if (f.resume) {
    std::vector<ChainState> states(static_cast<std::size_t>(mc.chains));
    std::vector<ChainHistory> histories(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
      const std::string stem = "checkpoints/chain_" + std::to_string(k);
      io::chain_state_from_json(io::read_text(dir.require(stem + ".json")), states[k], histories[k]);
      io::read_history_csv(dir.require(stem + "_history.csv"), histories[k]);
    }
    res = run_mcmc(target, mc, std::move(states), std::move(histories));
  } else {
    res = run_mcmc(target, mc);
  }
  write_members(dir, "mcmc_samples.csv", res.retained);
  std::string diag;
  for (std::size_t k = 0; k < res.histories.size(); ++k) {
    const auto& h = res.histories[k];
    diag += json{{"chain", k},
                 {"iterations", h.iterations},
                 {"acceptance_rate", h.acceptance_rate()},
                 {"proposal_fallbacks", res.final_states[k].proposal.fallbacks()}}
                .dump() +
            "\n";
  }
  for (const auto& p : res.psrf_trace) {
    diag += json{{"iteration", p.iteration}, {"psrf", std::isfinite(p.value) ? json(p.value) : json("inf")}}
                .dump() +
            "\n";
  }
  diag += json{{"retained", res.retained.cols()},
               {"final_psrf", std::isfinite(res.final_psrf) ? json(res.final_psrf) : json("inf")}}
              .dump() +
          "\n";
  io::write_text(dir.path("mcmc_diagnostics.jsonl"), diag);
  dir.wrote("mcmc_diagnostics.jsonl");
  if (f.checkpoint) {
    for (std::size_t k = 0; k < res.final_states.size(); ++k) {
      const std::string stem = "checkpoints/chain_" + std::to_string(k);
      io::write_text(dir.path(stem + ".json"), io::chain_state_json(res.final_states[k], res.histories[k]));
      dir.wrote(stem + ".json");
      io::write_history_csv(dir.path(stem + "_history.csv"), res.histories[k]);
      dir.wrote(stem + "_history.csv");
    }
  }
  write_manifest(dir, "invert-mcmc", cfg, {{"resume", f.resume}, {"checkpoint", f.checkpoint}});
  out << "mcmc: " << res.retained.cols() << " retained samples, final psrf " << res.final_psrf << "\n";
  return 0;
}

std::string samples_file(const std::string& method) {
  return method == "enrml" ? "enrml_posterior.csv" : "mcmc_samples.csv";
}

int cmd_stats(const Flags& f, const Given& g, std::ostream& out) {
  const ExperimentConfig cfg = load_config(f, g);
  const std::string method = pick_method(f, g);
  RunDir dir(f.out);
  const Eigen::MatrixXd samples = read_members(dir, samples_file(method), cfg);
  const PosteriorSummary s = posterior_stats(samples, cfg, method);
  io::write_resistivity_csv(dir.path(method + "_mean.csv"), s.posterior.mean);
  dir.wrote(method + "_mean.csv");
  io::write_resistivity_csv(dir.path(method + "_std.csv"), s.posterior.std);
  dir.wrote(method + "_std.csv");
  io::write_resistivity_csv(dir.path(method + "_prior_std.csv"), s.prior.std);
  dir.wrote(method + "_prior_std.csv");
  io::write_resistivity_csv(dir.path(method + "_ratio.csv"), s.std_ratio);
  dir.wrote(method + "_ratio.csv");
  const double near = near_well_ratio(s, cfg);
  const double ahead = ahead_of_bit_ratio(s, cfg);
  const json summary = {{"method", method},
                        {"samples", s.posterior.count},
                        {"near_well_std_ratio", near},
                        {"ahead_of_bit_std_ratio", ahead},
                        {"window_m", 15.0},
                        {"ahead_columns", 5}};
  io::write_text(dir.path(method + "_summary.json"), summary.dump(2) + "\n");
  dir.wrote(method + "_summary.json");
  write_manifest(dir, "stats", cfg, {{"method", method}}, method);
  out << method << ": " << s.posterior.count << " samples, near-well std ratio " << near
      << ", ahead-of-bit " << ahead << "\n";
  return 0;
}

int cmd_export(const Flags& f, const Given& g, std::ostream& out) {
  const ExperimentConfig cfg = load_config(f, g);
  const std::string method = pick_method(f, g);
  RunDir dir(f.out);
  const auto& geom = cfg.generator.grid;
  const auto well = cfg.well.cells();
  const double lo = kFaciesResistivity[1];
  const double hi = kFaciesResistivity[0];
  const ResistivityGrid mean = read_grid(dir, method + "_mean.csv", geom);
  const ResistivityGrid sd = read_grid(dir, method + "_std.csv", geom);
  const ResistivityGrid ratio = read_grid(dir, method + "_ratio.csv", geom);
  io::write_pgm(dir.path(method + "_mean.pgm"), mean, lo, hi, well);
  dir.wrote(method + "_mean.pgm");
  // Largest possible two-facies sample std is |220 - 3.6| / sqrt(2) ~ 153.
  io::write_pgm(dir.path(method + "_std.pgm"), sd, 0.0, (hi - lo) / std::sqrt(2.0), well);
  dir.wrote(method + "_std.pgm");
  io::write_pgm(dir.path(method + "_ratio.pgm"), ratio, 0.0, 1.5, well);
  dir.wrote(method + "_ratio.pgm");
  if (fs::exists(dir.path("truth_resistivity.csv"))) {
    io::write_pgm(dir.path("truth.pgm"), read_grid(dir, "truth_resistivity.csv", geom), lo, hi, well);
    dir.wrote("truth.pgm");
  }
  io::write_grid_header(dir.path(method + "_grids.json"), geom, "resistivity");
  dir.wrote(method + "_grids.json");
  write_manifest(dir, "export", cfg, {{"method", method}}, method);
  out << "exported " << method << " images to " << f.out << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent-model geosteering inversion: EnRML and adaptive MCMC", "geosteer"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", GEOSTEER_VERSION);

  Flags f;
  Given g;
  auto add_common = [&](CLI::App* sub) {
    g.seed = sub->add_option("--seed", f.seed, "Experiment seed");
    sub->add_option("--config", f.config, "Config JSON or a manifest from an earlier run")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "Run directory")->required();
    g.n = sub->add_option("--n", f.n, "Ensemble size");
    g.chains = sub->add_option("--chains", f.chains, "Number of MCMC chains");
    g.iters = sub->add_option("--iters", f.iters, "MCMC iterations per chain");
    g.thin = sub->add_option("--thin", f.thin, "Keep every k-th state of each second half");
    g.localize = sub->add_option("--localize", f.localize, "Correlation threshold in [0, 1)");
    sub->add_flag("--paper-scale", f.paper_scale, "N = 500; 8 chains x 1e6 iterations, thin 100");
    g.method = sub->add_option("--method", f.method, "enrml or mcmc (stats, export)");
    g.count = sub->add_option("--count", f.count, "Number of prior draws (generate)");
    sub->add_flag("--checkpoint", f.checkpoint, "Write chain checkpoints (invert-mcmc)");
    sub->add_flag("--resume", f.resume, "Continue chains from checkpoints (invert-mcmc)");
  };

  using Handler = int (*)(const Flags&, const Given&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"generate", "Prior draws and their grids", cmd_generate},
      {"truth", "Synthetic true model", cmd_truth},
      {"simulate", "Logs along the well and the noise model", cmd_simulate},
      {"invert-enrml", "Iterative ensemble smoother", cmd_invert_enrml},
      {"invert-mcmc", "Adaptive Metropolis chains", cmd_invert_mcmc},
      {"stats", "Posterior mean/std grids and std ratios", cmd_stats},
      {"export", "Graymap images of the statistics grids", cmd_export},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    handlers[sub] = fn;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  // Every subcommand binds the same Flags; only the selected one parses.
  for (auto& [sub, fn] : handlers) add_common(sub);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  for (auto& [sub, fn] : handlers) {
    if (!sub->parsed()) continue;
    // Rebind the presence markers to the chosen subcommand's options.
    g.seed = sub->get_option("--seed");
    g.n = sub->get_option("--n");
    g.chains = sub->get_option("--chains");
    g.iters = sub->get_option("--iters");
    g.thin = sub->get_option("--thin");
    g.localize = sub->get_option("--localize");
    g.method = sub->get_option("--method");
    g.count = sub->get_option("--count");
    try {
      return fn(f, g, out);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}

}  // namespace geosteer::cli
