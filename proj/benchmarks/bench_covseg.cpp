#include <benchmark/benchmark.h>

#include <covseg/segmentation.hpp>
#include <covseg/stats.hpp>
#include <covseg/synthetic.hpp>

namespace {

using namespace covseg;

ReturnMatrix gaussian_block(std::uint64_t seed, std::ptrdiff_t m, std::ptrdiff_t t) {
  MixtureScenario scenario;
  scenario.seed = seed;
  RegimeSpec regime;
  regime.length = t;
  regime.mean = Eigen::VectorXd::Zero(m);
  regime.covariance = Eigen::MatrixXd::Constant(m, m, 0.4);
  regime.covariance.diagonal().setConstant(1.0);
  scenario.regimes = {regime};
  return sample_scenario(scenario).data;
}

ReturnMatrix fx_scale_mixture(std::uint64_t seed) {
  const std::ptrdiff_t m = 30;
  MixtureScenario scenario;
  scenario.seed = seed;
  const struct {
    std::ptrdiff_t length;
    double rho;
    double scale;
  } blocks[] = {{800, 0.3, 1.0}, {700, 0.7, 2.0}, {660, 0.5, 0.5}, {600, 0.85, 3.0}};
  for (const auto& block : blocks) {
    RegimeSpec regime;
    regime.length = block.length;
    regime.mean = Eigen::VectorXd::Zero(m);
    regime.covariance = Eigen::MatrixXd::Constant(m, m, block.rho * block.scale);
    regime.covariance.diagonal().setConstant(block.scale);
    scenario.regimes.push_back(regime);
  }
  return sample_scenario(scenario).data;
}

void BM_EstimateGaussian(benchmark::State& state) {
  const std::ptrdiff_t m = state.range(0);
  const ReturnMatrix data = gaussian_block(1, m, 2000);
  for (auto _ : state) {
    GaussianEstimate est = estimate_gaussian(data, {0, 2000});
    benchmark::DoNotOptimize(est.covariance.data());
  }
}
BENCHMARK(BM_EstimateGaussian)->Arg(5)->Arg(30);

void BM_LogDetPsd(benchmark::State& state) {
  const std::ptrdiff_t m = state.range(0);
  const ReturnMatrix data = gaussian_block(2, m, 4 * m);
  const GaussianEstimate est = estimate_gaussian(data, {0, 4 * m});
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_det_psd(est.covariance));
  }
}
BENCHMARK(BM_LogDetPsd)->Arg(5)->Arg(30);

// One full Delta(t) sweep; linear in T thanks to the streaming moment sums.
void BM_DeltaSpectrum(benchmark::State& state) {
  const std::ptrdiff_t m = state.range(0);
  const std::ptrdiff_t t = state.range(1);
  const ReturnMatrix data = gaussian_block(3, m, t);
  SplitConfig config;
  config.delta0 = SplitConfig::default_delta0(m);
  for (auto _ : state) {
    DeltaSpectrum spectrum = delta_spectrum(data, {0, t}, config);
    benchmark::DoNotOptimize(spectrum.best_value);
  }
  state.SetComplexityN(t);
}
BENCHMARK(BM_DeltaSpectrum)
    ->Args({5, 500})
    ->Args({5, 1000})
    ->Args({5, 2000})
    ->Args({5, 4000})
    ->Complexity(benchmark::oN);

void BM_DeltaSpectrumFxScale(benchmark::State& state) {
  const ReturnMatrix data = gaussian_block(5, 30, 2760);
  SplitConfig config;
  config.delta0 = 300.0;
  for (auto _ : state) {
    DeltaSpectrum spectrum = delta_spectrum(data, {0, 2760}, config);
    benchmark::DoNotOptimize(spectrum.best_value);
  }
}
BENCHMARK(BM_DeltaSpectrumFxScale)->Unit(benchmark::kMillisecond);

// The oracle route at a single offset, for contrast with the fast path.
void BM_BruteForceDelta(benchmark::State& state) {
  const std::ptrdiff_t m = state.range(0);
  const ReturnMatrix data = gaussian_block(4, m, 1000);
  SplitConfig config;
  config.delta0 = SplitConfig::default_delta0(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_force_delta(data, {0, 1000}, 500, config));
  }
}
BENCHMARK(BM_BruteForceDelta)->Arg(5)->Arg(30);

// The FX-scale workload end to end (segmentation only, data prebuilt).
void BM_SegmentRecursiveFxScale(benchmark::State& state) {
  const ReturnMatrix data = fx_scale_mixture(99);
  SplitConfig config;
  config.delta0 = 300.0;
  config.max_threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SegmentationResult result = segment_recursive(data, config);
    benchmark::DoNotOptimize(result.segments.size());
  }
}
BENCHMARK(BM_SegmentRecursiveFxScale)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
