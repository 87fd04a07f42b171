#pragma once

#include "spibb/fsc.hpp"
#include "spibb/mdp.hpp"
#include "spibb/pomdp.hpp"

namespace spibb {

enum class OccupancyWeighting {
  kDiscounted,    // history weight gamma^(t-1) * reach probability
  kUndiscounted,  // plain reach probability (what visit counts converge to)
};

struct OracleOptions {
  /// Enumeration horizon; <= 0 selects
  /// window + ceil(log(1e-6)/log(gamma)), capped at 300.
  int horizon = 0;
  OccupancyWeighting weighting = OccupancyWeighting::kDiscounted;
  /// Branches whose reach probability falls below this are dropped and
  /// accounted to truncation_mass.
  double prune_threshold = 1e-14;
};

/// Exact finite-history MDP of a known POMDP plus the per-state beliefs the
/// construction aggregated.
struct OracleMdp {
  TabularMdp mdp;
  std::vector<std::vector<double>> beliefs;  // [hist][s], rows sum to 1 where reached
  std::vector<double> occupancy;             // [hist] aggregated weight
  std::vector<int> unreached;                // history states with zero weight
  double truncation_mass = 0.0;              // occupancy beyond the horizon
};

/// Builds the finite-history MDP of `pomdp` on the ⟨node, observation⟩ grid
/// of `structure` by enumerating reachable histories up to the horizon,
/// propagating exact beliefs, and aggregating them per history state with
/// occupancy weights induced by `weighting_policy`. Transition and reward
/// rows then follow from the aggregated beliefs; terminal probability mass
/// is routed to the sink. Histories with equal beliefs and controller state
/// are merged during the sweep, which keeps the enumeration polynomial for
/// the benchmark models.
OracleMdp build_oracle_finite_history_mdp(const Pomdp& pomdp,
                                          const Fsc& structure,
                                          const Fsc& weighting_policy,
                                          const OracleOptions& options = {});

/// Default horizon used when OracleOptions.horizon <= 0.
int default_oracle_horizon(int window, double gamma);

}  // namespace spibb
