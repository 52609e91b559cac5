#include <benchmark/benchmark.h>

#include "geosteer/emlog.hpp"
#include "geosteer/enrml.hpp"
#include "geosteer/generator.hpp"
#include "geosteer/harness.hpp"
#include "geosteer/petro.hpp"

using namespace geosteer;

namespace {

void BM_ForwardThreeLayers(benchmark::State& state) {
  const ToolSpec tool = ToolSpec::standard();
  const LayeredMedium m{{14.0, 18.0}, {220.0, 3.6, 220.0}, 16.0};
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, tool));
}
BENCHMARK(BM_ForwardThreeLayers);

void BM_GenerateFullGrid(benchmark::State& state) {
  const GeneratorConfig cfg;
  const Eigen::MatrixXd z = sample_prior({cfg.latent_dim(), 1e-6, 1}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(generate(z.col(0), cfg));
}
BENCHMARK(BM_GenerateFullGrid);

void BM_WellLog(benchmark::State& state) {
  const ExperimentConfig cfg;
  const Eigen::MatrixXd z = sample_prior(cfg.prior(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(well_log(z.col(0), cfg));
}
BENCHMARK(BM_WellLog);

void BM_EnrmlUpdate(benchmark::State& state) {
  const ExperimentConfig cfg;
  const auto n = static_cast<int>(state.range(0));
  const Truth truth = make_truth(cfg);
  const SyntheticData data = simulate_observations(truth, cfg);
  ExperimentConfig sized = cfg;
  sized.ensemble_size = n;
  const ObservationModel obs = build_observation_model(data, sized);
  const Eigen::MatrixXd ens = sample_prior(cfg.prior(), n);
  const Eigen::MatrixXd pred = evaluate_ensemble(pipeline_forward(cfg), ens);
  for (auto _ : state) {
    const Anomalies a = compute_anomalies(ens, pred, obs);
    benchmark::DoNotOptimize(enrml_update(a, truncate_svd(a.dd), obs, 1.0, pred));
  }
}
BENCHMARK(BM_EnrmlUpdate)->Arg(100)->Arg(500);

void BM_LogPosterior(benchmark::State& state) {
  const ExperimentConfig cfg;
  const SyntheticData data = simulate_observations(make_truth(cfg), cfg);
  const TargetDensity target = build_target(data, cfg);
  const Eigen::MatrixXd z = sample_prior(cfg.prior(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(target.log_posterior(z.col(0)));
}
BENCHMARK(BM_LogPosterior);

}  // namespace
BENCHMARK_MAIN();
