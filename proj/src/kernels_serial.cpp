#include <algorithm>
#include <cmath>
#include <limits>

#include "guide/kernels.hpp"

namespace guide::kernels {

double bellman_sweep_serial(const FlatMdp& mdp, std::span<const double> in, std::span<double> out) {
  double delta = 0.0;
  for (std::size_t s = 0; s < mdp.states; ++s) {
    const std::size_t base = s * mdp.actions;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < mdp.actions; ++a) {
      const double q = mdp.reward[base + a] + mdp.gamma * in[mdp.successor[base + a]];
      if (q > best) best = q;
    }
    out[s] = best;
    delta = std::max(delta, std::abs(best - in[s]));
  }
  return delta;
}

void greedy_policy_serial(const FlatMdp& mdp, std::span<const double> v, std::span<std::uint16_t> policy) {
  for (std::size_t s = 0; s < mdp.states; ++s) {
    const std::size_t base = s * mdp.actions;
    double best = -std::numeric_limits<double>::infinity();
    std::uint16_t arg = 0;
    for (std::size_t a = 0; a < mdp.actions; ++a) {
      const double q = mdp.reward[base + a] + mdp.gamma * v[mdp.successor[base + a]];
      if (q > best) {
        best = q;
        arg = static_cast<std::uint16_t>(a);
      }
    }
    policy[s] = arg;
  }
}

}  // namespace guide::kernels
