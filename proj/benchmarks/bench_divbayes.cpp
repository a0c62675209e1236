#include <benchmark/benchmark.h>

#include "divbayes/datagen.hpp"
#include "divbayes/density.hpp"
#include "divbayes/oracle.hpp"
#include "divbayes/sampler.hpp"

using namespace divbayes;

namespace {

DivergenceSpec spec_for(int k) {
  switch (k) {
    case 0: return DivergenceSpec::kl();
    case 1: return DivergenceSpec::hellinger();
    case 2: return DivergenceSpec::tv();
    case 3: return DivergenceSpec::alpha(0.75);
    default: return DivergenceSpec::power(0.5);
  }
}

void BM_LogPosteriorGaussian(benchmark::State& state) {
  const auto y = datagen::gen_eps_contam(1000, 1);
  const Dataset data(y);
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  const GBPosterior post(GaussianModel{}, location_scale_prior(0, 10, 0.001, 0.001), data, spec,
                         spec.needs_density_estimate() ? density_context(data) : LossContext{});
  const std::vector<double> theta = {0.1, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(post.log_posterior(theta));
  state.SetLabel(spec.name());
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(data.size()));
}
BENCHMARK(BM_LogPosteriorGaussian)->DenseRange(0, 4);

void BM_LogPosteriorRegression(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto beta = datagen::draw_coefficients(p, 2);
  const Dataset data = datagen::gen_hetero_linreg(200, p, beta, 3);
  const GBPosterior post(LinRegModel{p}, conjugate_regression_prior(p), data, DivergenceSpec::tv(),
                         density_context(data));
  std::vector<double> theta(p + 1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(post.log_posterior(theta));
}
BENCHMARK(BM_LogPosteriorRegression)->Arg(1)->Arg(5);

void BM_MarginalKde(benchmark::State& state) {
  const auto y = datagen::gen_eps_contam(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(density_context(Dataset(y)));
}
BENCHMARK(BM_MarginalKde)->Arg(200)->Arg(1000);

void BM_ConditionalKdeFit(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const Dataset data = datagen::gen_hetero_linreg(200, p, datagen::draw_coefficients(p, 5), 6);
  for (auto _ : state) benchmark::DoNotOptimize(fit_conditional_kde(data));
}
BENCHMARK(BM_ConditionalKdeFit)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_QuadDivergence(benchmark::State& state) {
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  const auto g = oracle::gaussian_density(0.0, 1.0);
  const auto f = oracle::gaussian_density(0.7, 1.3);
  const auto [lo, hi] = oracle::gaussian_interval(0.0, 1.0, 0.7, 1.3);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::quad_divergence(spec, g, f, lo, hi));
  state.SetLabel(spec.name());
}
BENCHMARK(BM_QuadDivergence)->DenseRange(0, 4);

void BM_SamplerConjugate(benchmark::State& state) {
  const GBPosterior post(GaussianModel{1.0}, location_prior(0.0, 1.0), Dataset({0.5, 1.5, 0.0, 2.0}),
                         DivergenceSpec::kl());
  SamplerOptions o;
  o.n_warmup = 1000;
  o.n_keep = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(run_mcmc(post, o));
}
BENCHMARK(BM_SamplerConjugate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
