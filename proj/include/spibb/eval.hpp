#pragma once

#include <cstdint>
#include <vector>

#include "spibb/envs.hpp"
#include "spibb/fsc.hpp"
#include "spibb/oracle.hpp"

namespace spibb {

struct RolloutStats {
  double mean = 0.0;
  double stderr_mean = 0.0;
  int episodes = 0;
};

/// Monte Carlo estimate of the controller's discounted return from the
/// initial belief. Deterministic given the seed.
RolloutStats rollout_performance(const EnvSpec& env, const Fsc& policy,
                                 int episodes, int max_steps, double gamma,
                                 std::uint64_t seed);

/// (rho_i - rho_beta) / (rho_max - rho_beta); throws std::domain_error when
/// the denominator is (numerically) zero.
double normalized_improvement(double rho_i, double rho_beta, double rho_max);

/// Mean of the ceil(x% * n) smallest values. x in (0, 100]; 100 gives the
/// plain mean.
double cvar(const std::vector<double>& values, double x_percent);

struct ReferenceOptimum {
  Fsc policy;
  RolloutStats stats;
  double mdp_value = 0.0;  // optimal value of the oracle finite-history MDP
};

/// Performance reference: solves the oracle finite-history MDP at window
/// k_max (beliefs weighted by a uniform controller), turns the greedy table
/// into a controller (uniform on states the enumeration never reached) and
/// evaluates it by rollout.
ReferenceOptimum reference_optimum(const EnvSpec& env, int k_max,
                                   int eval_episodes, int max_steps,
                                   std::uint64_t seed);

}  // namespace spibb
