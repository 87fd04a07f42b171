#include "spibb/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "spibb/pomdp.hpp"

namespace spibb {

void QLearnConfig::validate() const {
  if (k < 1) throw std::invalid_argument("qlearn: k must be >= 1");
  if (episodes < 0) throw std::invalid_argument("qlearn: negative episode count");
  if (!(alpha0 > 0.0 && alpha0 <= 1.0))
    throw std::invalid_argument("qlearn: alpha0 must be in (0, 1]");
  if (!(epsilon0 > 0.0 && epsilon0 <= 1.0))
    throw std::invalid_argument("qlearn: epsilon0 must be in (0, 1]");
  if (lambda < 0.0) throw std::invalid_argument("qlearn: lambda must be >= 0");
  if (max_steps < 1) throw std::invalid_argument("qlearn: max_steps must be >= 1");
}

namespace {

int argmax_lowest(const std::vector<double>& row) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(row.size()); ++a)
    if (row[a] > row[best]) best = a;
  return best;
}

}  // namespace

QTable train_q_learning(const EnvSpec& env, const QLearnConfig& cfg,
                        std::vector<TrainLogEntry>* log) {
  cfg.validate();
  const Pomdp& pomdp = env.pomdp;
  const Fsc structure =
      make_k_window_fsc(cfg.k, pomdp.num_obs(), pomdp.num_actions(), pomdp.obs_names);

  QTable table;
  table.n_history_states = structure.num_history_states();
  table.n_actions = pomdp.num_actions();
  table.values.assign(table.n_history_states,
                      std::vector<double>(table.n_actions, 0.0));
  table.visited.assign(table.n_history_states,
                       std::vector<bool>(table.n_actions, false));

  Rng rng(cfg.seed);
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    const double alpha = cfg.alpha0 * std::exp(-cfg.lambda * episode);
    const double epsilon = cfg.epsilon0 * std::exp(-cfg.lambda * episode);
    double episode_return = 0.0;

    auto [state, obs] = sample_initial(pomdp, rng);
    NodeId node = structure.initial_node;
    for (int t = 0; t < cfg.max_steps; ++t) {
      const int hist = structure.history_index(node, obs);
      const int action = rng.uniform() < epsilon
                             ? rng.uniform_int(table.n_actions)
                             : argmax_lowest(table.values[hist]);
      const NodeId next_node = structure.eta(node, obs, action);
      const StepResult result = step(pomdp, state, action, rng);
      episode_return += result.reward;
      const bool done = pomdp.is_terminal(result.next_state);

      double target = result.reward;
      if (!done) {
        const int next_hist = structure.history_index(next_node, result.obs);
        target += pomdp.discount *
                  table.values[next_hist][argmax_lowest(table.values[next_hist])];
      }
      double& q = table.values[hist][action];
      q += alpha * (target - q);
      table.visited[hist][action] = true;

      if (done) break;
      state = result.next_state;
      obs = result.obs;
      node = next_node;
    }
    if (log) log->push_back({episode, episode_return, alpha, epsilon});
  }
  return table;
}

Fsc softmax_policy(const Fsc& structure, const QTable& q, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax_policy: tau must be positive");
  if (q.n_history_states != structure.num_history_states() ||
      q.n_actions != structure.n_actions)
    throw std::invalid_argument("softmax_policy: Q-table does not match the structure");

  Fsc out = structure;
  for (int n = 0; n < structure.num_nodes(); ++n) {
    for (int z = 0; z < structure.n_obs; ++z) {
      const auto& row = q.values[structure.history_index(n, z)];
      const double top = *std::max_element(row.begin(), row.end());
      double total = 0.0;
      std::vector<double>& psi = out.action_probs[n][z];
      for (int a = 0; a < structure.n_actions; ++a) {
        psi[a] = std::exp(tau * (row[a] - top));
        total += psi[a];
      }
      for (double& v : psi) v /= total;
    }
  }
  return out;
}

std::string qtable_to_json(const QTable& q) {
  nlohmann::json j;
  j["n_history_states"] = q.n_history_states;
  j["n_actions"] = q.n_actions;
  j["values"] = q.values;
  j["visited"] = q.visited;
  return j.dump(2);
}

QTable qtable_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  QTable q;
  q.n_history_states = j.at("n_history_states").get<int>();
  q.n_actions = j.at("n_actions").get<int>();
  q.values = j.at("values").get<std::vector<std::vector<double>>>();
  q.visited = j.at("visited").get<std::vector<std::vector<bool>>>();
  return q;
}

void save_train_log(const std::vector<TrainLogEntry>& log,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "episode,return,alpha,epsilon\n";
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", e.episode,
                  e.undiscounted_return, e.alpha, e.epsilon);
    out << buf;
  }
}

}  // namespace spibb
