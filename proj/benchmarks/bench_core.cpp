#include <benchmark/benchmark.h>

#include "twostep/actor_critic.hpp"
#include "twostep/lqr_offline.hpp"

using namespace twostep;

namespace {

const Mat kK0 = (Mat(1, 2) << -2.87, -2.00).finished();
const Mat kK = (Mat(1, 2) << -10.7560, -1.2997).finished();

void BM_Features(benchmark::State& state) {
  const BasisGrid grid = BasisGrid::pendulum_default();
  Vec out(grid.size());
  Vec x = (Vec(2) << 0.1, -0.3).finished();
  for (auto _ : state) {
    grid.features_into(x, out);
    benchmark::DoNotOptimize(out.data());
    x(0) += 1e-9;
  }
}
BENCHMARK(BM_Features);

void BM_Lyapunov(benchmark::State& state) {
  const LinearModel lin = linearize_pendulum(PendulumParams{});
  const Mat acl = lin.a + lin.b * kK0;
  const Mat m = Mat::Identity(2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(acl, m));
}
BENCHMARK(BM_Lyapunov);

void BM_CollectData(benchmark::State& state) {
  const PlantModel plant = make_pendulum_plant(PendulumParams{});
  const CollectionOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(collect_data(plant, kK0, 1, opt));
}
BENCHMARK(BM_CollectData)->Unit(benchmark::kMillisecond);

void BM_PolicyIteration(benchmark::State& state) {
  const PlantModel plant = make_pendulum_plant(PendulumParams{});
  const DataWindowSet data = collect_data(plant, kK0, 1, CollectionOptions{});
  const CostWeights w = CostWeights::pendulum_defaults();
  for (auto _ : state) benchmark::DoNotOptimize(policy_iteration(data, kK0, w, 1e-3));
}
BENCHMARK(BM_PolicyIteration)->Unit(benchmark::kMicrosecond);

void BM_Episode(benchmark::State& state) {
  const PlantModel plant = make_pendulum_plant(PendulumParams{});
  const BasisGrid grid = BasisGrid::pendulum_default();
  const ActorCriticParams params;
  CriticState critic = initial_critic(params, grid.size());
  ActorState actor = initial_actor(params, grid.size(), 1);
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_episode(plant, kK, critic, actor, grid, params, rng));
  }
  state.SetItemsProcessed(state.iterations() * params.steps_per_episode());
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
