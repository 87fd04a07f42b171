#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spibb/envs.hpp"
#include "spibb/fsc.hpp"

namespace spibb {

/// Hyperparameters for tabular Q-learning over ⟨node, observation⟩ states.
/// Learning and exploration rates decay exponentially per episode:
/// alpha_i = alpha0 * exp(-lambda * i), epsilon_i likewise.
struct QLearnConfig {
  int k = 1;
  int episodes = 5000;
  double alpha0 = 1.0;
  double epsilon0 = 0.5;
  double lambda = 0.002;
  int max_steps = 300;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Q-values indexed by history state (node * n_obs + obs) and action.
struct QTable {
  int n_history_states = 0;
  int n_actions = 0;
  std::vector<std::vector<double>> values;    // [hist][a]
  std::vector<std::vector<bool>> visited;     // [hist][a]

  double q(int hist, int a) const { return values[hist][a]; }
};

/// One row of the per-episode training log.
struct TrainLogEntry {
  int episode;
  double undiscounted_return;
  double alpha;
  double epsilon;
};

/// Runs tabular Q-learning on the environment using the k-window memory
/// abstraction. Deterministic given cfg.seed. When log is non-null, one
/// entry per episode is appended.
QTable train_q_learning(const EnvSpec& env, const QLearnConfig& cfg,
                        std::vector<TrainLogEntry>* log = nullptr);

/// Extracts a stochastic controller from a Q-table:
/// ψ(a|n,z) = exp(tau * Q(⟨n,z⟩,a)) / Σ_a' exp(tau * Q(⟨n,z⟩,a')),
/// computed with max subtraction. Throws std::invalid_argument when
/// tau <= 0.
Fsc softmax_policy(const Fsc& structure, const QTable& q, double tau);

/// QTable JSON round trip and training-log CSV
/// (columns: episode,return,alpha,epsilon).
std::string qtable_to_json(const QTable& q);
QTable qtable_from_json(const std::string& text);
void save_train_log(const std::vector<TrainLogEntry>& log,
                    const std::string& path);

}  // namespace spibb
