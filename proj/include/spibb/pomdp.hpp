#pragma once

#include <string>
#include <vector>

#include "spibb/rng.hpp"

namespace spibb {

using StateId = int;
using ActionId = int;
using ObsId = int;

/// Probability distribution over hidden states.
struct Belief {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
  double& operator[](int s) { return probs[s]; }
  double operator[](int s) const { return probs[s]; }

  /// Throws std::invalid_argument unless entries are nonnegative and sum
  /// to 1 within 1e-9.
  void validate() const;
};

/// Tabular partially observable Markov decision process.
///
/// Conventions:
///  - transition[s][a] is a distribution over successor states;
///  - observation[s_next][a] is a distribution over observations, i.e. the
///    observation depends on the state landed in and the action taken;
///  - initial_observation[s] is the distribution of the percept received at
///    episode start in state s, before any action. When empty it defaults
///    to uniform (an uninformative start);
///  - terminal states end the episode on entry; their rows must self-loop
///    with probability 1 and reward 0.
struct Pomdp {
  std::vector<std::string> state_names;
  std::vector<std::string> action_names;
  std::vector<std::string> obs_names;

  std::vector<std::vector<std::vector<double>>> transition;   // [s][a][s']
  std::vector<std::vector<std::vector<double>>> observation;  // [s'][a][z]
  std::vector<std::vector<double>> reward;                    // [s][a]
  double reward_min = 0.0;
  double reward_max = 0.0;
  double discount = 0.0;
  Belief initial_belief;
  std::vector<bool> terminal;                         // [s]
  std::vector<std::vector<double>> initial_observation;  // [s][z], optional

  int num_states() const { return static_cast<int>(state_names.size()); }
  int num_actions() const { return static_cast<int>(action_names.size()); }
  int num_obs() const { return static_cast<int>(obs_names.size()); }

  bool is_terminal(StateId s) const { return terminal[s]; }

  /// Initial-observation row for state s (uniform when the table is empty).
  std::vector<double> initial_obs_row(StateId s) const;

  /// Validates every structural invariant and throws std::invalid_argument
  /// naming the first violated row.
  void validate() const;
};

struct StepResult {
  StateId next_state;
  ObsId obs;
  double reward;
};

/// Samples one environment transition: s' ~ T(.|s,a), z ~ O(.|s',a),
/// r = R(s,a). Deterministic given the rng state.
StepResult step(const Pomdp& pomdp, StateId state, ActionId action, Rng& rng);

/// Samples the episode-start pair (state, observation).
std::pair<StateId, ObsId> sample_initial(const Pomdp& pomdp, Rng& rng);

/// Bayesian belief update: b'(s') ∝ O(z|s',a) · Σ_s T(s'|s,a) b(s).
/// Throws ImpossibleObservationError when the total likelihood is zero.
Belief belief_update(const Pomdp& pomdp, const Belief& belief, ActionId action,
                     ObsId obs);

/// JSON (de)serialization of the POMDP file format. load_pomdp validates
/// the result before returning it.
std::string pomdp_to_json(const Pomdp& pomdp);
Pomdp pomdp_from_json(const std::string& text);
void save_pomdp(const Pomdp& pomdp, const std::string& path);
Pomdp load_pomdp(const std::string& path);

}  // namespace spibb
