#include <algorithm>
#include <cmath>
#include <limits>

#include "guide/kernels.hpp"

namespace guide::kernels {

double bellman_sweep_parallel(const FlatMdp& mdp, std::span<const double> in, std::span<double> out) {
  const auto states = static_cast<long long>(mdp.states);
  const std::size_t actions = mdp.actions;
  const double gamma = mdp.gamma;
  const std::uint32_t* succ = mdp.successor.data();
  const double* rew = mdp.reward.data();
  const double* v = in.data();
  double* o = out.data();
  double delta = 0.0;
#pragma omp parallel for schedule(static) reduction(max : delta)
  for (long long s = 0; s < states; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * actions;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < actions; ++a) {
      const double q = rew[base + a] + gamma * v[succ[base + a]];
      if (q > best) best = q;
    }
    o[s] = best;
    delta = std::max(delta, std::abs(best - v[s]));
  }
  return delta;
}

void greedy_policy_parallel(const FlatMdp& mdp, std::span<const double> v, std::span<std::uint16_t> policy) {
  const auto states = static_cast<long long>(mdp.states);
#pragma omp parallel for schedule(static)
  for (long long s = 0; s < states; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * mdp.actions;
    double best = -std::numeric_limits<double>::infinity();
    std::uint16_t arg = 0;
    for (std::size_t a = 0; a < mdp.actions; ++a) {
      const double q = mdp.reward[base + a] + mdp.gamma * v[mdp.successor[base + a]];
      if (q > best) {
        best = q;
        arg = static_cast<std::uint16_t>(a);
      }
    }
    policy[static_cast<std::size_t>(s)] = arg;
  }
}

}  // namespace guide::kernels
