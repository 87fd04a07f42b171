#include "spibb/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "spibb/pomdp.hpp"

namespace spibb {

std::size_t Dataset::total_steps() const {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.steps.size();
  return n;
}

long long CountTable::transition_total(int hist, int a) const {
  long long total = 0;
  for (long long c : transitions[hist][a]) total += c;
  return total;
}

void CountTable::add(const CountTable& other) {
  if (other.n_history_states != n_history_states || other.n_actions != n_actions)
    throw std::invalid_argument("count tables cover different grids");
  num_episodes += other.num_episodes;
  for (int h = 0; h < n_history_states; ++h) {
    initial_counts[h] += other.initial_counts[h];
    for (int a = 0; a < n_actions; ++a) {
      visits[h][a] += other.visits[h][a];
      reward_sums[h][a] += other.reward_sums[h][a];
      for (int t = 0; t <= n_history_states; ++t)
        transitions[h][a][t] += other.transitions[h][a][t];
    }
  }
}

Dataset collect_dataset(const EnvSpec& env, const Fsc& behavior,
                        int num_trajectories, int max_steps,
                        std::uint64_t seed) {
  if (num_trajectories < 0)
    throw std::invalid_argument("collect_dataset: negative trajectory count");
  if (max_steps < 1) throw std::invalid_argument("collect_dataset: max_steps must be >= 1");
  const Pomdp& pomdp = env.pomdp;
  if (behavior.n_obs != pomdp.num_obs() || behavior.n_actions != pomdp.num_actions())
    throw std::invalid_argument("collect_dataset: controller does not match the environment");

  Dataset data;
  data.meta.env_name = env.name;
  data.meta.k = behavior.window;
  data.meta.seed = seed;
  data.meta.num_trajectories = num_trajectories;
  data.episodes.reserve(num_trajectories);

  for (int traj = 0; traj < num_trajectories; ++traj) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(traj)}));
    Episode episode;
    auto [state, obs] = sample_initial(pomdp, rng);
    NodeId node = behavior.initial_node;
    for (int t = 0; t < max_steps; ++t) {
      const auto [action, next_node] = fsc_step(behavior, node, obs, rng);
      const StepResult result = step(pomdp, state, action, rng);
      const bool done = pomdp.is_terminal(result.next_state);
      episode.steps.push_back({node, obs, action, result.reward, done});
      if (done) break;
      state = result.next_state;
      obs = result.obs;
      node = next_node;
    }
    data.episodes.push_back(std::move(episode));
  }
  return data;
}

CountTable count(const Dataset& dataset, const Fsc& fsc) {
  CountTable table;
  table.n_history_states = fsc.num_history_states();
  table.n_actions = fsc.n_actions;
  table.visits.assign(table.n_history_states,
                      std::vector<long long>(table.n_actions, 0));
  table.reward_sums.assign(table.n_history_states,
                           std::vector<double>(table.n_actions, 0.0));
  table.transitions.assign(
      table.n_history_states,
      std::vector<std::vector<long long>>(
          table.n_actions, std::vector<long long>(table.n_history_states + 1, 0)));
  table.initial_counts.assign(table.n_history_states, 0);
  table.num_episodes = static_cast<long long>(dataset.episodes.size());

  const int sink_column = table.n_history_states;
  for (std::size_t ep = 0; ep < dataset.episodes.size(); ++ep) {
    const auto& steps = dataset.episodes[ep].steps;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const DatasetStep& s = steps[i];
      if (i == 0 && s.node != fsc.initial_node)
        throw CorruptDatasetError("episode " + std::to_string(ep) +
                                  " does not start at the initial node");
      if (s.done && i + 1 != steps.size())
        throw CorruptDatasetError("episode " + std::to_string(ep) +
                                  " continues past a terminal step");
      const int hist = fsc.history_index(s.node, s.obs);
      table.visits[hist][s.action] += 1;
      table.reward_sums[hist][s.action] += s.reward;
      if (i == 0) table.initial_counts[hist] += 1;

      if (i + 1 < steps.size()) {
        const DatasetStep& next = steps[i + 1];
        if (next.node != fsc.eta(s.node, s.obs, s.action))
          throw CorruptDatasetError("episode " + std::to_string(ep) + ", step " +
                                    std::to_string(i + 1) +
                                    ": node does not follow the memory update");
        table.transitions[hist][s.action][fsc.history_index(next.node, next.obs)] += 1;
      } else if (s.done) {
        table.transitions[hist][s.action][sink_column] += 1;
      }
      // a step cut off by the step cap has no recorded successor
    }
  }
  return table;
}

Dataset relabel_dataset(const Dataset& dataset, const Fsc& target_structure) {
  Dataset out;
  out.meta = dataset.meta;
  out.meta.k = target_structure.window;
  out.episodes.resize(dataset.episodes.size());
  for (std::size_t ep = 0; ep < dataset.episodes.size(); ++ep) {
    const auto& steps = dataset.episodes[ep].steps;
    auto& new_steps = out.episodes[ep].steps;
    new_steps.reserve(steps.size());
    NodeId node = target_structure.initial_node;
    for (const DatasetStep& s : steps) {
      new_steps.push_back({node, s.obs, s.action, s.reward, s.done});
      node = target_structure.eta(node, s.obs, s.action);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// serialization

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out = "episode,t,node,obs,action,reward,done\n";
  char buf[160];
  for (std::size_t ep = 0; ep < dataset.episodes.size(); ++ep) {
    const auto& steps = dataset.episodes[ep].steps;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const DatasetStep& s = steps[t];
      std::snprintf(buf, sizeof(buf), "%zu,%zu,%d,%d,%d,%.17g,%d\n", ep, t,
                    s.node, s.obs, s.action, s.reward, s.done ? 1 : 0);
      out += buf;
    }
  }
  return out;
}

std::string dataset_meta_to_json(const DatasetMeta& meta) {
  nlohmann::json j;
  j["env"] = meta.env_name;
  j["behavior_id"] = meta.behavior_id;
  j["k"] = meta.k;
  j["seed"] = meta.seed;
  j["num_trajectories"] = meta.num_trajectories;
  return j.dump(2);
}

Dataset dataset_from_csv(const std::string& csv_text,
                         const std::string& meta_json) {
  Dataset data;
  {
    nlohmann::json j = nlohmann::json::parse(meta_json);
    data.meta.env_name = j.at("env").get<std::string>();
    data.meta.behavior_id = j.at("behavior_id").get<std::string>();
    data.meta.k = j.at("k").get<int>();
    data.meta.seed = j.at("seed").get<std::uint64_t>();
    data.meta.num_trajectories = j.at("num_trajectories").get<int>();
  }
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || line != "episode,t,node,obs,action,reward,done")
    throw std::invalid_argument("dataset csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t ep, t;
    int node, obs, action, done;
    double reward;
    if (std::sscanf(line.c_str(), "%zu,%zu,%d,%d,%d,%lg,%d", &ep, &t, &node,
                    &obs, &action, &reward, &done) != 7)
      throw std::invalid_argument("dataset csv: bad row '" + line + "'");
    if (ep >= data.episodes.size()) data.episodes.resize(ep + 1);
    if (t != data.episodes[ep].steps.size())
      throw std::invalid_argument("dataset csv: step indices out of order");
    data.episodes[ep].steps.push_back({node, obs, action, reward, done != 0});
  }
  return data;
}

void save_dataset(const Dataset& dataset, const std::string& csv_path,
                  const std::string& meta_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
  csv << dataset_to_csv(dataset);
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open " + meta_path + " for writing");
  meta << dataset_meta_to_json(dataset.meta) << '\n';
}

Dataset load_dataset(const std::string& csv_path, const std::string& meta_path) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  return dataset_from_csv(slurp(csv_path), slurp(meta_path));
}

}  // namespace spibb
