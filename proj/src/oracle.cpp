#include "spibb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace spibb {

int default_oracle_horizon(int window, double gamma) {
  if (window < 1) window = 1;
  if (gamma <= 0.0) return window + 1;
  const int tail = static_cast<int>(std::ceil(std::log(1e-6) / std::log(gamma)));
  return std::min(300, std::max(window + 1, window + tail));
}

namespace {

// A bundle of histories sharing controller state and belief; prob is their
// total reach probability at the current depth.
struct HistoryTuple {
  NodeId node;
  int obs;
  std::vector<double> belief;
  double prob;
};

using TupleKey = std::vector<long long>;

TupleKey make_key(NodeId node, int obs, const std::vector<double>& belief) {
  TupleKey key;
  key.reserve(belief.size() + 2);
  key.push_back(node);
  key.push_back(obs);
  for (double b : belief) key.push_back(llround(b * 1e10));
  return key;
}

}  // namespace

OracleMdp build_oracle_finite_history_mdp(const Pomdp& pomdp,
                                          const Fsc& structure,
                                          const Fsc& weighting_policy,
                                          const OracleOptions& options) {
  if (structure.n_obs != pomdp.num_obs() || structure.n_actions != pomdp.num_actions())
    throw std::invalid_argument("oracle: structure does not match the model");
  if (weighting_policy.num_nodes() != structure.num_nodes() ||
      weighting_policy.n_obs != structure.n_obs)
    throw std::invalid_argument("oracle: weighting policy does not match the structure");

  const int ns = pomdp.num_states();
  const int nz = pomdp.num_obs();
  const int na = pomdp.num_actions();
  const int n_hist = structure.num_history_states();
  const double gamma = pomdp.discount;
  const int horizon = options.horizon > 0
                          ? options.horizon
                          : default_oracle_horizon(structure.window, gamma);

  OracleMdp out;
  out.mdp = TabularMdp::make(n_hist, na, gamma, pomdp.reward_min, pomdp.reward_max);
  out.beliefs.assign(n_hist, std::vector<double>(ns, 0.0));
  out.occupancy.assign(n_hist, 0.0);

  // episode-start distribution over ⟨initial node, first observation⟩
  std::vector<double> init_dist(out.mdp.n_states, 0.0);
  std::vector<HistoryTuple> frontier;
  for (int z = 0; z < nz; ++z) {
    double pz = 0.0;
    std::vector<double> posterior(ns, 0.0);
    for (int s = 0; s < ns; ++s) {
      const double mass = pomdp.initial_belief[s] * pomdp.initial_obs_row(s)[z];
      posterior[s] = mass;
      pz += mass;
    }
    if (pz <= 0.0) continue;
    for (double& v : posterior) v /= pz;
    init_dist[structure.history_index(structure.initial_node, z)] = pz;
    frontier.push_back({structure.initial_node, z, std::move(posterior), pz});
  }
  out.mdp.set_initial_distribution(init_dist);

  // occupancy-weighted belief aggregation per history state
  std::vector<std::vector<double>> belief_sums(n_hist, std::vector<double>(ns, 0.0));
  double truncation = 0.0;
  double depth_weight = 1.0;  // gamma^(t-1) for discounted weighting

  for (int t = 1; t <= horizon && !frontier.empty(); ++t) {
    for (const HistoryTuple& tuple : frontier) {
      const int hist = structure.history_index(tuple.node, tuple.obs);
      const double w = depth_weight * tuple.prob;
      out.occupancy[hist] += w;
      for (int s = 0; s < ns; ++s) belief_sums[hist][s] += w * tuple.belief[s];
    }

    const double next_weight =
        options.weighting == OccupancyWeighting::kDiscounted ? depth_weight * gamma : 1.0;
    if (t == horizon) {
      for (const HistoryTuple& tuple : frontier) truncation += next_weight * tuple.prob;
      break;
    }

    std::map<TupleKey, int> index;
    std::vector<HistoryTuple> next;
    std::vector<double> push(ns, 0.0);
    for (const HistoryTuple& tuple : frontier) {
      const auto& psi = weighting_policy.psi(tuple.node, tuple.obs);
      for (int a = 0; a < na; ++a) {
        const double pa = psi[a];
        if (pa <= 0.0) continue;
        const NodeId next_node = structure.eta(tuple.node, tuple.obs, a);
        std::fill(push.begin(), push.end(), 0.0);
        for (int s = 0; s < ns; ++s) {
          const double b = tuple.belief[s];
          if (b <= 0.0) continue;
          const auto& row = pomdp.transition[s][a];
          for (int s2 = 0; s2 < ns; ++s2)
            if (row[s2] > 0.0) push[s2] += b * row[s2];
        }
        for (int z2 = 0; z2 < nz; ++z2) {
          double like = 0.0;
          std::vector<double> belief(ns, 0.0);
          for (int s2 = 0; s2 < ns; ++s2) {
            if (pomdp.terminal[s2] || push[s2] <= 0.0) continue;
            const double mass = pomdp.observation[s2][a][z2] * push[s2];
            belief[s2] = mass;
            like += mass;
          }
          const double prob = tuple.prob * pa * like;
          if (prob <= options.prune_threshold) {
            truncation += next_weight * prob;
            continue;
          }
          for (double& v : belief) v /= like;
          const TupleKey key = make_key(next_node, z2, belief);
          auto [it, inserted] = index.try_emplace(key, static_cast<int>(next.size()));
          if (inserted) {
            next.push_back({next_node, z2, std::move(belief), prob});
          } else {
            HistoryTuple& merged = next[it->second];
            // probability-weighted belief merge; keys agree to 1e-10 already
            const double total = merged.prob + prob;
            for (int s2 = 0; s2 < ns; ++s2)
              merged.belief[s2] =
                  (merged.belief[s2] * merged.prob + belief[s2] * prob) / total;
            merged.prob = total;
          }
        }
      }
    }
    frontier.swap(next);
    depth_weight = next_weight;
  }
  out.truncation_mass = truncation;
  out.mdp.truncation_mass = truncation;

  // rows from the aggregated beliefs
  for (int n = 0; n < structure.num_nodes(); ++n) {
    for (int z = 0; z < nz; ++z) {
      const int hist = structure.history_index(n, z);
      out.mdp.state_names[hist] = structure.node_labels.empty()
                                      ? std::to_string(n) + "|" + std::to_string(z)
                                      : structure.node_labels[n] + "|" +
                                            (static_cast<int>(pomdp.obs_names.size()) > z
                                                 ? pomdp.obs_names[z]
                                                 : std::to_string(z));
      if (out.occupancy[hist] <= 0.0) {
        out.unreached.push_back(hist);
        continue;
      }
      auto& belief = out.beliefs[hist];
      for (int s = 0; s < ns; ++s) belief[s] = belief_sums[hist][s] / out.occupancy[hist];
      double norm = 0.0;
      for (double v : belief) norm += v;
      for (double& v : belief) v /= norm;

      for (int a = 0; a < na; ++a) {
        double expected_reward = 0.0;
        std::vector<double> push(ns, 0.0);
        for (int s = 0; s < ns; ++s) {
          const double b = belief[s];
          if (b <= 0.0) continue;
          expected_reward += b * pomdp.reward[s][a];
          const auto& row = pomdp.transition[s][a];
          for (int s2 = 0; s2 < ns; ++s2)
            if (row[s2] > 0.0) push[s2] += b * row[s2];
        }
        auto& trow = out.mdp.transition[hist][a];
        const NodeId next_node = structure.eta(n, z, a);
        for (int s2 = 0; s2 < ns; ++s2) {
          if (push[s2] <= 0.0) continue;
          if (pomdp.terminal[s2]) {
            trow[out.mdp.sink_state] += push[s2];
            continue;
          }
          const auto& orow = pomdp.observation[s2][a];
          for (int z2 = 0; z2 < nz; ++z2)
            if (orow[z2] > 0.0)
              trow[structure.history_index(next_node, z2)] += push[s2] * orow[z2];
        }
        out.mdp.reward[hist][a] = expected_reward;
        out.mdp.defined[hist][a] = true;
      }
    }
  }
  return out;
}

}  // namespace spibb
