#pragma once

#include <string>
#include <vector>

#include "spibb/errors.hpp"
#include "spibb/rng.hpp"

namespace spibb {

using NodeId = int;

/// Index of a ⟨node, observation⟩ history state.
struct HistoryState {
  NodeId node = 0;
  int obs = 0;
};

/// Finite-state controller: memory nodes, a stochastic action map ψ and a
/// deterministic memory update η. The pair (current node, current
/// observation) is the controller's full decision context.
struct Fsc {
  int n_obs = 0;
  int n_actions = 0;
  NodeId initial_node = 0;
  /// Window length covered by ⟨node, obs⟩ for controllers built by
  /// make_k_window_fsc; 0 for hand-built controllers.
  int window = 0;

  std::vector<std::vector<std::vector<double>>> action_probs;  // ψ [n][z][a]
  std::vector<std::vector<std::vector<NodeId>>> memory_update; // η [n][z][a]
  std::vector<std::string> node_labels;

  int num_nodes() const { return static_cast<int>(action_probs.size()); }
  int num_history_states() const { return num_nodes() * n_obs; }
  int history_index(NodeId n, int z) const { return n * n_obs + z; }

  const std::vector<double>& psi(NodeId n, int z) const {
    return action_probs[n][z];
  }
  NodeId eta(NodeId n, int z, int a) const { return memory_update[n][z][a]; }

  /// Throws std::invalid_argument on a non-normalized ψ row or an η entry
  /// out of range.
  void validate() const;
};

/// Builds the k-window memory structure over an observation alphabet of
/// size n_obs: each node stores the last k-1 observations (padded before
/// the episode has produced that many), so ⟨node, current observation⟩
/// encodes exactly the last k observations. ψ is initialized uniform over
/// n_actions. Node count is (n_obs + 1)^(k-1).
Fsc make_k_window_fsc(int k, int n_obs, int n_actions,
                      const std::vector<std::string>& obs_names = {});

/// Samples an action from ψ(.|n,z) and returns it with the successor node
/// η(n,z,a).
std::pair<int, NodeId> fsc_step(const Fsc& fsc, NodeId node, int obs, Rng& rng);

/// Returns a controller sharing nodes, initial node and η with `structure`
/// whose action map is replaced by `action_table`, indexed like ψ. Throws
/// IncompletePolicyError on a missing or non-normalized row.
Fsc fsc_from_table(const Fsc& structure,
                   const std::vector<std::vector<std::vector<double>>>& action_table);

/// Window digits stored in a node of a k-window structure, oldest first;
/// the value n_obs denotes the pre-episode pad symbol.
std::vector<int> decode_window(const Fsc& fsc, NodeId node);

/// Lifts a k-window controller to a k'-window structure (k' >= k): the new
/// ψ row at a long window equals the source row at the window's last k-1
/// entries, so the lifted controller is behaviorally identical.
Fsc lift_window_fsc(const Fsc& fsc, int k_prime);

/// JSON round trip; exact on doubles.
std::string fsc_to_json(const Fsc& fsc);
Fsc fsc_from_json(const std::string& text);
void save_fsc(const Fsc& fsc, const std::string& path);
Fsc load_fsc(const std::string& path);

}  // namespace spibb
