#include "apm/estimate.hpp"
#include "apm/inference.hpp"
#include "apm/perturb.hpp"
#include "apm/sim.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

apm::DgpTruth staircase_truth(int cohorts) {
  const auto sets = apm::MissingnessPattern::staircase(cohorts, 3).t_sets();
  const int t = cohorts + 2;
  apm::DgpTruth truth;
  truth.gamma = apm::Matrix::Ones(t, 1) + 0.1 * apm::Matrix::Random(t, 1);
  for (int c = 0; c < cohorts; ++c) {
    apm::CohortDgp k;
    k.prob = 1.0 / cohorts;
    k.loading_mean = apm::Vector::Constant(1, 1.0 + 0.2 * c);
    k.loading_cov = apm::Matrix::Identity(1, 1);
    k.t_set = sets[c];
    k.noise_var = 0.25;
    truth.cohorts.push_back(k);
  }
  return truth;
}

void BM_EstimateAll(benchmark::State& state) {
  const apm::Panel panel = apm::generate(staircase_truth(5), static_cast<int>(state.range(0)), 1);
  const apm::CohortIndex index = apm::cohortize(panel);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apm::estimate_all(panel, index, apm::EstimatorConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateAll)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_BootstrapReplicate(benchmark::State& state) {
  const apm::Panel panel = apm::generate(staircase_truth(5), static_cast<int>(state.range(0)), 2);
  const apm::CohortIndex index = apm::cohortize(panel);
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    const apm::Vector w = apm::draw_weights(panel.n_units(), rng);
    benchmark::DoNotOptimize(apm::estimate_all(
        panel, index, apm::EstimatorConfig{}, {w.data(), static_cast<std::size_t>(w.size())}));
  }
}
BENCHMARK(BM_BootstrapReplicate)->Arg(2000)->Arg(20000);

void BM_FirstOrderTerm(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const apm::Matrix a = apm::Matrix::Random(d, d);
  const apm::Matrix m = (a + a.transpose()) / 2.0;
  const apm::Matrix b = apm::Matrix::Random(d, d);
  const apm::Matrix delta = 0.01 * (b + b.transpose());
  const apm::EigenWindow window = apm::EigenWindow::of(m, 0, d / 2);
  for (auto _ : state) benchmark::DoNotOptimize(apm::first_order_term(window, delta));
}
BENCHMARK(BM_FirstOrderTerm)->Arg(8)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
