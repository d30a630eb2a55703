#pragma once

// Data-parallel inner loops. Each kernel has a serial reference kept for testing; the OpenMP
// variant must produce bit-identical results.

#include <cstdint>
#include <span>
#include <vector>

namespace guide::kernels {

/// Deterministic MDP flattened to arrays: for state s and action a, successor[s*A + a]
/// and reward[s*A + a]. Absorbing states carry their own index as successor and reward 0.
struct FlatMdp {
  std::size_t states = 0;
  std::size_t actions = 0;
  double gamma = 0.9;
  std::vector<std::uint32_t> successor;
  std::vector<double> reward;
};

/// One synchronous Bellman sweep out = max_a (R + gamma*in[s']); returns max |out - in|.
double bellman_sweep_serial(const FlatMdp& mdp, std::span<const double> in, std::span<double> out);
double bellman_sweep_parallel(const FlatMdp& mdp, std::span<const double> in, std::span<double> out);

/// argmax_a (R + gamma*v[s']) with lowest-index tie-breaking.
void greedy_policy_serial(const FlatMdp& mdp, std::span<const double> v, std::span<std::uint16_t> policy);
void greedy_policy_parallel(const FlatMdp& mdp, std::span<const double> v, std::span<std::uint16_t> policy);

}  // namespace guide::kernels
