#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spibb/envs.hpp"
#include "spibb/fsc.hpp"

namespace spibb {

/// One recorded interaction: the controller was at `node`, saw `obs`, took
/// `action` and received `reward`. The successor ⟨node, obs⟩ is the next
/// step of the same episode; `done` marks entry into a terminal state.
struct DatasetStep {
  NodeId node;
  int obs;
  int action;
  double reward;
  bool done;
};

struct Episode {
  std::vector<DatasetStep> steps;
};

struct DatasetMeta {
  std::string env_name;
  std::string behavior_id;
  int k = 0;
  std::uint64_t seed = 0;
  int num_trajectories = 0;
};

struct Dataset {
  std::vector<Episode> episodes;
  DatasetMeta meta;

  std::size_t total_steps() const;
};

/// Occurrence statistics over the ⟨node, observation⟩ × action grid.
/// `visits` counts every occurrence; `transitions` pairs each step with its
/// within-episode successor, routing terminal steps to a sink column (index
/// n_history_states). Steps cut off by the step cap have no successor, so
/// per-pair transition totals can fall short of visits.
struct CountTable {
  int n_history_states = 0;
  int n_actions = 0;
  std::vector<std::vector<long long>> visits;          // [hist][a]
  std::vector<std::vector<double>> reward_sums;        // [hist][a]
  std::vector<std::vector<std::vector<long long>>> transitions;  // [hist][a][hist+1]
  std::vector<long long> initial_counts;               // [hist], episode-first states
  long long num_episodes = 0;

  long long transition_total(int hist, int a) const;

  /// Merges another table over the same grid (counts are additive).
  void add(const CountTable& other);
};

/// Simulates `num_trajectories` episodes of the environment under the
/// behavior controller, each until a terminal state or max_steps.
/// Per-trajectory seeds are derived from `seed`, so results are independent
/// of collection order.
Dataset collect_dataset(const EnvSpec& env, const Fsc& behavior,
                        int num_trajectories, int max_steps,
                        std::uint64_t seed);

/// Exact occurrence counts of the dataset on the controller's
/// ⟨node, observation⟩ grid. Verifies that recorded node sequences follow
/// the controller's memory update and throws CorruptDatasetError otherwise.
CountTable count(const Dataset& dataset, const Fsc& fsc);

/// Re-derives the node column for a different window structure by replaying
/// each episode's observations and actions through the target memory
/// update. Used to re-count a dataset on a k'-window grid.
Dataset relabel_dataset(const Dataset& dataset, const Fsc& target_structure);

/// CSV rows (episode,t,node,obs,action,reward,done) plus a JSON sidecar for
/// the metadata. Round trips are byte-exact.
std::string dataset_to_csv(const Dataset& dataset);
std::string dataset_meta_to_json(const DatasetMeta& meta);
Dataset dataset_from_csv(const std::string& csv_text,
                         const std::string& meta_json);
void save_dataset(const Dataset& dataset, const std::string& csv_path,
                  const std::string& meta_path);
Dataset load_dataset(const std::string& csv_path,
                     const std::string& meta_path);

}  // namespace spibb
