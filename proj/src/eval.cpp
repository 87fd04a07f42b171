#include "spibb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spibb/pomdp.hpp"

namespace spibb {

RolloutStats rollout_performance(const EnvSpec& env, const Fsc& policy,
                                 int episodes, int max_steps, double gamma,
                                 std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("rollout: episodes must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("rollout: max_steps must be >= 1");
  const Pomdp& pomdp = env.pomdp;
  if (policy.n_obs != pomdp.num_obs() || policy.n_actions != pomdp.num_actions())
    throw std::invalid_argument("rollout: controller does not match the environment");

  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    auto [state, obs] = sample_initial(pomdp, rng);
    NodeId node = policy.initial_node;
    double ret = 0.0, discount = 1.0;
    for (int t = 0; t < max_steps; ++t) {
      const auto [action, next_node] = fsc_step(policy, node, obs, rng);
      const StepResult result = step(pomdp, state, action, rng);
      ret += discount * result.reward;
      discount *= gamma;
      if (pomdp.is_terminal(result.next_state)) break;
      state = result.next_state;
      obs = result.obs;
      node = next_node;
    }
    sum += ret;
    sum_sq += ret * ret;
  }
  RolloutStats stats;
  stats.episodes = episodes;
  stats.mean = sum / episodes;
  if (episodes > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / episodes) / (episodes - 1));
    stats.stderr_mean = std::sqrt(var / episodes);
  }
  return stats;
}

double normalized_improvement(double rho_i, double rho_beta, double rho_max) {
  const double denom = rho_max - rho_beta;
  if (denom == 0.0)
    throw std::domain_error("normalized_improvement: reference policies have equal performance");
  return (rho_i - rho_beta) / denom;
}

double cvar(const std::vector<double>& values, double x_percent) {
  if (values.empty()) throw std::invalid_argument("cvar: empty input");
  if (!(x_percent > 0.0 && x_percent <= 100.0))
    throw std::invalid_argument("cvar: percentage must be in (0, 100]");
  const int n = static_cast<int>(values.size());
  int take = static_cast<int>(std::ceil(x_percent * n / 100.0 - 1e-9));
  take = std::clamp(take, 1, n);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (int i = 0; i < take; ++i) sum += sorted[i];
  return sum / take;
}

ReferenceOptimum reference_optimum(const EnvSpec& env, int k_max,
                                   int eval_episodes, int max_steps,
                                   std::uint64_t seed) {
  const Pomdp& pomdp = env.pomdp;
  Fsc structure = make_k_window_fsc(k_max, pomdp.num_obs(), pomdp.num_actions(),
                                    pomdp.obs_names);
  // beliefs weighted under the uniform controller, which reaches everything
  // reachable at all
  OracleMdp oracle = build_oracle_finite_history_mdp(pomdp, structure, structure);

  // give never-reached states a throwaway sink row so the solver can run;
  // the policy falls back to uniform there
  TabularMdp solvable = oracle.mdp;
  for (int h : oracle.unreached) {
    for (int a = 0; a < solvable.n_actions; ++a) {
      solvable.transition[h][a].assign(solvable.n_states, 0.0);
      solvable.transition[h][a][solvable.sink_state] = 1.0;
      solvable.reward[h][a] = 0.0;
      solvable.defined[h][a] = true;
    }
  }
  const ValueIterationResult vi = value_iteration(solvable, 1e-9);

  Fsc greedy = structure;
  std::vector<bool> unreached(structure.num_history_states(), false);
  for (int h : oracle.unreached) unreached[h] = true;
  for (int n = 0; n < structure.num_nodes(); ++n) {
    for (int z = 0; z < structure.n_obs; ++z) {
      const int h = structure.history_index(n, z);
      auto& row = greedy.action_probs[n][z];
      if (unreached[h]) continue;  // keep the uniform row
      std::fill(row.begin(), row.end(), 0.0);
      row[vi.greedy[h]] = 1.0;
    }
  }

  ReferenceOptimum result;
  result.policy = std::move(greedy);
  result.mdp_value = initial_value(solvable, vi.values);
  result.stats = rollout_performance(env, result.policy, eval_episodes, max_steps,
                                     pomdp.discount, seed);
  return result;
}

}  // namespace spibb
