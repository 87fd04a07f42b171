#pragma once

#include <string>
#include <vector>

#include "spibb/dataset.hpp"
#include "spibb/fsc.hpp"
#include "spibb/mdp.hpp"

namespace spibb {

struct SpibbConfig {
  long long n_wedge = 5;       // count threshold below which a pair is unknown
  double delta = 0.05;         // confidence parameter
  int k_prime = 1;             // window of the improved policy
  double v_max = 0.0;          // performance bound; <= 0 means r_max/(1-gamma)
  double tol = 1e-9;           // solver tolerance
  int max_policy_iterations = 1000;

  void validate() const;
  double effective_v_max(double reward_max, double gamma) const;
};

/// State-action pairs with too little data to trust the estimated model.
struct BootstrapSet {
  int n_history_states = 0;
  int n_actions = 0;
  std::vector<std::vector<bool>> unknown;  // [hist][a]

  bool contains(int hist, int a) const { return unknown[hist][a]; }
  long long size() const;
};

enum class BoundVariant { kHistoryMdp, kFiniteHistoryMdp };

std::string to_string(BoundVariant variant);

/// The admissible-performance-loss certificate attached to an improved
/// policy, with every input echoed so the bound can be recomputed.
struct SafetyReport {
  double zeta = 0.0;
  double epsilon = 0.0;
  double rho_improved_mle = 0.0;
  double rho_behavior_mle = 0.0;
  BoundVariant variant = BoundVariant::kFiniteHistoryMdp;
  bool finite = true;  // false when n_wedge = 0 makes the bound infinite

  // echoed inputs
  long long state_count = 0;
  int action_count = 0;
  int obs_count = 0;
  long long n_wedge = 0;
  double delta = 0.0;
  double v_max = 0.0;
  double gamma = 0.0;
};

std::string safety_report_to_json(const SafetyReport& report);

/// Maximum-likelihood MDP over the counting grid: T(s'|s,a) and R(s,a) are
/// empirical ratios for visited pairs; unvisited pairs stay undefined. The
/// initial-state row is the empirical distribution of episode-first states,
/// terminal mass is routed to the sink. Pairs whose only visits were cut
/// off by the step cap get a sink row carrying their empirical reward.
TabularMdp estimate_mle_mdp(const CountTable& counts, const Fsc& structure,
                            double gamma, double reward_min,
                            double reward_max);

/// Pairs with visits <= n_wedge, over the full grid (never-visited pairs
/// included).
BootstrapSet bootstrapped_set(const CountTable& counts, long long n_wedge);

struct SpibbResult {
  Fsc improved;
  SafetyReport report;
  int iterations = 0;
};

/// Constrained greedy policy iteration on the estimated MDP: at every state
/// the improved policy copies the behavior probabilities on unknown pairs
/// and moves the remaining behavior mass onto the known action with the
/// best current Q-value (ties to the lowest index). Iterates to a fixed
/// point. The returned controller shares nodes, initial node and memory
/// update with the behavior controller; the report carries the
/// finite-history ζ bound evaluated on the estimated MDP.
SpibbResult spibb_policy(const TabularMdp& mle, const Fsc& behavior,
                         const BootstrapSet& unknown, const SpibbConfig& cfg);

/// Unconstrained baseline: spibb_policy with an n_wedge = 0 bootstrapped
/// set, so only never-visited pairs stay on the behavior policy.
SpibbResult basic_rl_policy(const TabularMdp& mle, const Fsc& behavior,
                            const CountTable& counts, const SpibbConfig& cfg);

/// Admissible performance loss
///   ζ = 4 v_max / (1-γ) · sqrt((2/N) log(2 · SC · A · 2^|Z| / δ))
///       - ρ(π_I, M̃) + ρ(π_β, M̃)
/// together with the underlying L1 half-width ε. state_count is |N×Z| for
/// the finite-history variant or a finite proxy for the history-MDP
/// variant. n_wedge = 0 yields an infinite bound, flagged via `finite`.
SafetyReport zeta_bound(BoundVariant variant, long long state_count,
                        int action_count, int obs_count, long long n_wedge,
                        double delta, double v_max, double gamma,
                        double rho_improved_mle, double rho_behavior_mle);

/// Minimum per-pair sample count that certifies performance loss at most
/// zeta: ceil(8 v_max^2 / (zeta^2 (1-γ)^2) · log(2 · SC · A · 2^E / δ))
/// where the exponent set size E is obs_count when given (the
/// finite-history refinement) and state_count otherwise.
long long sufficiency_count(double zeta, double delta, long long state_count,
                            int action_count, double v_max, double gamma,
                            int obs_count = -1);

/// L1-concentration tail bound for an empirical distribution over
/// `support_size` outcomes estimated from m samples:
/// min(1, (2^support_size - 2) · exp(-m ε² / 2)).
double weissman_check(int support_size, double m, double epsilon);

}  // namespace spibb
