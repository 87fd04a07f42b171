#pragma once

#include <string>
#include <vector>

#include "spibb/errors.hpp"

namespace spibb {

/// Finite fully observable MDP over history states, estimated from data or
/// built exactly from a known model.
///
/// State layout: indices [0, num_history_states) are ⟨node, observation⟩
/// pairs, followed by a designated initial state and an absorbing sink.
/// The initial state is a chance state: it consumes no time step and pays
/// no reward; its "transition row" is the distribution of the first
/// ⟨node, observation⟩ pair of an episode, and its value is the plain
/// expectation of the successor values (no discount). The performance of a
/// policy is the value of the initial state.
struct TabularMdp {
  int n_states = 0;   // includes initial state and sink
  int n_actions = 0;
  double discount = 0.0;
  double reward_min = 0.0;
  double reward_max = 0.0;

  std::vector<std::vector<std::vector<double>>> transition;  // [s][a][s']
  std::vector<std::vector<double>> reward;                   // [s][a]
  std::vector<std::vector<bool>> defined;                    // [s][a]
  std::vector<std::vector<long long>> counts;                // [s][a]
  std::vector<std::vector<std::vector<long long>>> pair_counts;  // [s][a][s']

  int initial_state = -1;
  int sink_state = -1;
  std::vector<std::string> state_names;

  /// Occupancy mass beyond the enumeration horizon (oracle builds only).
  double truncation_mass = 0.0;

  int num_history_states() const { return initial_state; }
  bool row_defined(int s, int a) const { return defined[s][a]; }

  /// Allocates an MDP with the given history-state count; all history rows
  /// start undefined, the initial state and sink rows are installed.
  static TabularMdp make(int n_history_states, int n_actions, double discount,
                         double reward_min, double reward_max);

  /// Installs the episode-start distribution (a row over all states, with
  /// support on history states) as the initial state's transition row.
  void set_initial_distribution(const std::vector<double>& dist);

  /// Checks row normalization, count consistency and reward bounds; throws
  /// std::invalid_argument naming the first violated row.
  void validate() const;
};

/// Stochastic policy over MDP states: one probability row per state.
/// Rows for the initial state and sink are ignored by the solvers.
using MdpPolicy = std::vector<std::vector<double>>;

struct ValueIterationResult {
  std::vector<double> values;                // [s]
  std::vector<std::vector<double>> q_values; // [s][a]; 0 where undefined
  std::vector<int> greedy;                   // [s], lowest-index tie break
};

/// Bellman optimality iteration to sup-norm residual <= tol. Undefined rows
/// never win the maximization; if a state whose rows are all undefined is
/// reachable from the initial state under the greedy policy, throws
/// MissingDataError.
ValueIterationResult value_iteration(const TabularMdp& mdp, double tol);

/// Fixed point of the policy's Bellman operator within tol. Undefined rows
/// contribute value 0 (equivalent to jumping to the sink), matching the
/// estimation convention for unvisited pairs.
std::vector<double> policy_evaluation(const TabularMdp& mdp,
                                      const MdpPolicy& policy, double tol);

/// Expected value at the designated initial state.
double initial_value(const TabularMdp& mdp, const std::vector<double>& values);

/// Convenience: policy performance ρ = value of the initial state.
double policy_performance(const TabularMdp& mdp, const MdpPolicy& policy,
                          double tol);

}  // namespace spibb
