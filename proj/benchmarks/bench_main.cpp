#include <benchmark/benchmark.h>

#include "tamq/distribution.hpp"
#include "tamq/eigensolver.hpp"
#include "tamq/hamiltonian.hpp"
#include "tamq/quench.hpp"

namespace {

void BM_Matvec(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  tamq::HamiltonianOperator H({L, 0.4, 0.218});
  tamq::Vector v = tamq::even_sector_seed(L);
  tamq::Vector out;
  for (auto _ : state) {
    H.apply(v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(H.dimension()));
}
BENCHMARK(BM_Matvec)->Arg(10)->Arg(12)->Arg(14)->Arg(16);

void BM_GroundState(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) {
    tamq::HamiltonianOperator H({L, 0.4, 0.218});
    auto gs = tamq::ground_state(H);
    benchmark::DoNotOptimize(gs.first);
  }
}
BENCHMARK(BM_GroundState)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_SampleSignal(benchmark::State& state) {
  tamq::QuenchSpec q{{8, 0.3, 1.4}, {8, 0.3, 1.44}};
  const auto res = tamq::quench_spectrum_dense(q);
  const auto series = tamq::loschmidt_series(res.spectrum);
  tamq::SamplingPlan plan;
  plan.samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto emp = tamq::sample_signal(series, plan);
    benchmark::DoNotOptimize(emp.sample_mean);
  }
}
BENCHMARK(BM_SampleSignal)->Arg(1000)->Arg(40000)->Unit(benchmark::kMillisecond);

void BM_TwoModeDensity(benchmark::State& state) {
  tamq::TwoModeModel model{0.5, 0.3, 0.1, 1.0, 2.0};
  double f = 0.35;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tamq::two_mode_density(model, f));
  }
}
BENCHMARK(BM_TwoModeDensity);

}  // namespace

BENCHMARK_MAIN();
