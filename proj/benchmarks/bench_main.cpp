#include <benchmark/benchmark.h>

#include "oamjrc/bounds.hpp"
#include "oamjrc/estimate.hpp"
#include "oamjrc/synth.hpp"

using namespace oamjrc;

static void BM_KhatriRao(benchmark::State& state) {
  const SteeringSet st = steering_matrices(reference_scene(0.5));
  const CMatrix ba = khatri_rao(st.B, st.A_R);
  for (auto _ : state) benchmark::DoNotOptimize(khatri_rao(st.A_Tr, ba));
}
BENCHMARK(BM_KhatriRao);

static void BM_RadarSnapshots(benchmark::State& state) {
  const Scene s = reference_scene(0.5);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(radar_snapshots(s, state.range(0), ++seed));
}
BENCHMARK(BM_RadarSnapshots)->Arg(50)->Arg(200);

static void BM_SignalSubspace(benchmark::State& state) {
  const Scene s = reference_scene(0.5);
  const SnapshotBlock b = radar_snapshots(s, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(signal_subspace_from_snapshots(b.data, s.Q()));
}
BENCHMARK(BM_SignalSubspace)->Arg(50)->Arg(200);

static void BM_PositionPipeline(benchmark::State& state) {
  const Scene s = reference_scene(0.5);
  const ProcessingContext ctx = ProcessingContext::from_scene(s);
  const SnapshotBlock b = radar_snapshots(s, 200, 1);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_positions_from_block(b, ctx));
}
BENCHMARK(BM_PositionPipeline);

static void BM_PositionFim(benchmark::State& state) {
  const Scene s = reference_scene(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(position_fim(s, 200));
}
BENCHMARK(BM_PositionFim);

static void BM_DopplerVelocity(benchmark::State& state) {
  const Scene s = reference_scene(0.5);
  const ProcessingContext ctx = ProcessingContext::from_scene(s);
  std::vector<TargetEstimate> pos;
  for (const auto& t : s.targets) pos.push_back({t.R, t.psi, t.r, t.phi});
  const int K = static_cast<int>(state.range(0));
  std::vector<CpiChannel> ch{{0, 0, doppler_cpi(s, 0, 0, K, 5e-6, 1)}, {0, -5, doppler_cpi(s, 0, -5, K, 5e-6, 1)}};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_velocity(ch, pos, ctx, 5e-6));
}
BENCHMARK(BM_DopplerVelocity)->Arg(256)->Arg(1024);
BENCHMARK_MAIN();
