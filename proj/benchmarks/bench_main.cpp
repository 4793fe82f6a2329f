#include <benchmark/benchmark.h>

#include <mfcascade/analysis.hpp>
#include <mfcascade/growth_speed.hpp>
#include <mfcascade/tree.hpp>
#include <mfcascade/ubiquity.hpp>

using namespace mfc;

namespace {

const WeightModel& lognormal() {
  static const WeightModel m = WeightModel::lognormal(2, 0.1);
  return m;
}

void BM_LeafMasses(benchmark::State& state) {
  const CascadeTree t(lognormal(), 7);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(leaf_masses(t, n));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_LeafMasses)->DenseRange(10, 18, 4)->Unit(benchmark::kMillisecond);

void BM_TiltedField(benchmark::State& state) {
  const CascadeTree t(lognormal(), 7);
  const auto mu = leaf_masses(t, static_cast<int>(state.range(0)));
  const auto tilt = t.tilt(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(tilted_field(mu, tilt));
}
BENCHMARK(BM_TiltedField)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_PartitionFunction(benchmark::State& state) {
  const auto f = leaf_masses(CascadeTree(lognormal(), 7), 16);
  for (auto _ : state) benchmark::DoNotOptimize(partition_function(f, 2.0));
}
BENCHMARK(BM_PartitionFunction)->Unit(benchmark::kMicrosecond);

void BM_GrowthSpeed(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CascadeTree t(lognormal(), 7);
  const auto mu = leaf_masses(t, n);
  const double alpha = lognormal().tau_tilde_prime(1.0).value;
  const auto eps = EpsSequence::assump(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(growth_speed(mu, mu, alpha, 1, eps, 0.5, n));
}
BENCHMARK(BM_GrowthSpeed)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_LimsupCover(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const auto f = leaf_masses(CascadeTree(lognormal(), 7), depth);
  const auto system = PointSystem::badic(2, depth);
  const double alpha = lognormal().tau_tilde_prime(1.0).value;
  for (auto _ : state)
    benchmark::DoNotOptimize(limsup_cover(system, f, alpha, 2.0, EpsSequence::assump(0.5), 1));
}
BENCHMARK(BM_LimsupCover)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
