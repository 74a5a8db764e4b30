// Serial reference kernel vs the OpenMP kernel, and one full semiparametric fit.

#include "semimed/estimators.hpp"
#include "semimed/kernels.hpp"
#include "semimed/simulation.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

std::vector<double> draws(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

void BM_KernelSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto e = draws(n);
  std::vector<double> mass(n), moment(n);
  for (auto _ : state) {
    semimed::kernels::gaussian_kernel_sums_serial(e, e, 0.3, true, mass, moment);
    benchmark::DoNotOptimize(mass.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_KernelOpenMP(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto e = draws(n);
  std::vector<double> mass(n), moment(n);
  for (auto _ : state) {
    semimed::kernels::gaussian_kernel_sums(e, e, 0.3, true, mass, moment);
    benchmark::DoNotOptimize(mass.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_SemiparametricFit(benchmark::State& state) {
  semimed::ScenarioConfig c;
  c.error.law = semimed::ErrorLaw::asymmetric_mixture;
  c.n = static_cast<std::size_t>(state.range(0));
  const auto data = semimed::generate_interaction_dataset(c, 0);
  semimed::ModelSpec spec;
  spec.response = "Y";
  spec.treatment = "T";
  spec.mediator = "M";
  spec.interaction = true;
  const auto design = semimed::build_design(data, spec);
  for (auto _ : state) {
    auto fit = semimed::fit_semiparametric(design, data.column("Y"));
    benchmark::DoNotOptimize(fit.attempts.size());
  }
}

}  // namespace

BENCHMARK(BM_KernelSerial)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_KernelOpenMP)->RangeMultiplier(4)->Range(256, 16384)->Complexity();
BENCHMARK(BM_SemiparametricFit)->Arg(300)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
