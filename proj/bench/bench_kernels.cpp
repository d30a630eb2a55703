#include <benchmark/benchmark.h>

#include <omp.h>

#include "guide/experiment.hpp"
#include "guide/kernels.hpp"

using namespace guide;

namespace {

GridMap open_map(int n) {
  GridMap map(n, n, 1.0);
  for (int i = n / 4; i < 3 * n / 4; ++i) map.set_occupied({n / 2, i}, true);
  return map;
}

std::vector<Cell> corner_goals(int n) { return {{0, 0}, {n - 1, 0}, {0, n - 1}, {n - 1, n - 1}}; }

void BM_SolveAll(benchmark::State& state, mdp::Execution exec) {
  const int n = static_cast<int>(state.range(0));
  const GridMap map = open_map(n);
  const auto goals = corner_goals(n);
  const auto actions = mdp::ActionSet::king_moves();
  mdp::MdpParams params;
  for (auto _ : state) benchmark::DoNotOptimize(mdp::solve_all(goals, map, actions, params, exec));
  state.counters["threads"] = exec == mdp::Execution::Parallel ? omp_get_max_threads() : 1;
}

// One Jacobi sweep over a flattened MDP; the kernel inside solve().
void BM_Sweep(benchmark::State& state, bool parallel) {
  const std::size_t states = static_cast<std::size_t>(state.range(0));
  const std::size_t actions = 9;
  kernels::FlatMdp mdp;
  mdp.states = states;
  mdp.actions = actions;
  mdp.gamma = 0.9;
  mdp.successor.resize(states * actions);
  mdp.reward.resize(states * actions);
  for (std::size_t s = 0; s < states; ++s)
    for (std::size_t a = 0; a < actions; ++a) {
      mdp.successor[s * actions + a] = static_cast<std::uint32_t>((s + a * 7919) % states);
      mdp.reward[s * actions + a] = -1.0 - 0.1 * static_cast<double>(a);
    }
  std::vector<double> in(states, 0.0), out(states, 0.0);
  for (auto _ : state) {
    const double d = parallel ? kernels::bellman_sweep_parallel(mdp, in, out) : kernels::bellman_sweep_serial(mdp, in, out);
    benchmark::DoNotOptimize(d);
    std::swap(in, out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(states));
}

void BM_Experiment(benchmark::State& state, mdp::Execution exec) {
  Scene scene;
  scene.name = "bench";
  scene.map = GridMap(8, 5, 1.0);
  scene.goals = {{7, 2}, {7, 4}};
  scene.guide_goal = 0;
  scene.human_start = {0.5, 2.5};
  scene.robot_start = {1.5, 2.5};
  sim::SimConfig cfg;
  cfg.planner.iterations = 200;
  const sim::Environment env(scene, cfg);
  const sim::Environment* envs[] = {&env};
  experiment::ExperimentSpec spec;
  spec.trials = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(experiment::run_experiment(envs, spec, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_SolveAll, serial, mdp::Execution::Serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SolveAll, parallel, mdp::Execution::Parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sweep, serial, false)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK_CAPTURE(BM_Sweep, parallel, true)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK_CAPTURE(BM_Experiment, serial, mdp::Execution::Serial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Experiment, parallel, mdp::Execution::Parallel)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
