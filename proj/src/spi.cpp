#include "spibb/spi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace spibb {

void SpibbConfig::validate() const {
  if (n_wedge < 0) throw std::invalid_argument("spibb: n_wedge must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("spibb: delta must be in (0, 1)");
  if (k_prime < 1) throw std::invalid_argument("spibb: k_prime must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("spibb: tol must be positive");
  if (max_policy_iterations < 1)
    throw std::invalid_argument("spibb: max_policy_iterations must be >= 1");
}

double SpibbConfig::effective_v_max(double reward_max, double gamma) const {
  if (v_max > 0.0) return v_max;
  return std::max(0.0, reward_max) / (1.0 - gamma);
}

long long BootstrapSet::size() const {
  long long n = 0;
  for (const auto& row : unknown)
    for (bool u : row)
      if (u) ++n;
  return n;
}

std::string to_string(BoundVariant variant) {
  return variant == BoundVariant::kHistoryMdp ? "history-mdp" : "finite-history-mdp";
}

TabularMdp estimate_mle_mdp(const CountTable& counts, const Fsc& structure,
                            double gamma, double reward_min,
                            double reward_max) {
  const int n_hist = counts.n_history_states;
  const int na = counts.n_actions;
  if (structure.num_history_states() != n_hist || structure.n_actions != na)
    throw std::invalid_argument("estimate_mle_mdp: counts do not match the structure");

  TabularMdp mdp = TabularMdp::make(n_hist, na, gamma, reward_min, reward_max);
  for (int n = 0; n < structure.num_nodes(); ++n)
    for (int z = 0; z < structure.n_obs; ++z)
      mdp.state_names[structure.history_index(n, z)] =
          (structure.node_labels.empty() ? std::to_string(n) : structure.node_labels[n]) +
          "|z" + std::to_string(z);

  const int sink_column = n_hist;
  for (int h = 0; h < n_hist; ++h) {
    for (int a = 0; a < na; ++a) {
      const long long visits = counts.visits[h][a];
      if (visits == 0) continue;  // unvisited pairs stay undefined
      mdp.reward[h][a] = counts.reward_sums[h][a] / visits;
      const long long total = counts.transition_total(h, a);
      auto& row = mdp.transition[h][a];
      if (total > 0) {
        for (int t = 0; t < sink_column; ++t) {
          const long long c = counts.transitions[h][a][t];
          if (c == 0) continue;
          row[t] = static_cast<double>(c) / total;
          mdp.pair_counts[h][a][t] = c;
        }
        const long long to_sink = counts.transitions[h][a][sink_column];
        if (to_sink > 0) {
          row[mdp.sink_state] = static_cast<double>(to_sink) / total;
          mdp.pair_counts[h][a][mdp.sink_state] = to_sink;
        }
        mdp.counts[h][a] = total;
      } else {
        // every visit was cut off by the step cap: keep the empirical reward
        // and route the pair to the sink
        row[mdp.sink_state] = 1.0;
      }
      mdp.defined[h][a] = true;
    }
  }

  if (counts.num_episodes > 0) {
    std::vector<double> init(mdp.n_states, 0.0);
    for (int h = 0; h < n_hist; ++h)
      init[h] = static_cast<double>(counts.initial_counts[h]) / counts.num_episodes;
    mdp.set_initial_distribution(init);
  }
  return mdp;
}

BootstrapSet bootstrapped_set(const CountTable& counts, long long n_wedge) {
  BootstrapSet set;
  set.n_history_states = counts.n_history_states;
  set.n_actions = counts.n_actions;
  set.unknown.assign(set.n_history_states, std::vector<bool>(set.n_actions, false));
  for (int h = 0; h < set.n_history_states; ++h)
    for (int a = 0; a < set.n_actions; ++a)
      set.unknown[h][a] = counts.visits[h][a] <= n_wedge;
  return set;
}

namespace {

MdpPolicy policy_table_from_fsc(const TabularMdp& mdp, const Fsc& fsc) {
  MdpPolicy table(mdp.n_states,
                  std::vector<double>(mdp.n_actions, 1.0 / mdp.n_actions));
  for (int n = 0; n < fsc.num_nodes(); ++n)
    for (int z = 0; z < fsc.n_obs; ++z)
      table[fsc.history_index(n, z)] = fsc.action_probs[n][z];
  return table;
}

std::vector<std::vector<double>> q_from_values(const TabularMdp& mdp,
                                               const std::vector<double>& values) {
  std::vector<std::vector<double>> q(mdp.n_states,
                                     std::vector<double>(mdp.n_actions, 0.0));
  for (int s = 0; s < mdp.n_states; ++s) {
    if (s == mdp.initial_state) continue;
    for (int a = 0; a < mdp.n_actions; ++a) {
      if (!mdp.defined[s][a]) continue;  // unknown rows keep value 0
      double v = mdp.reward[s][a];
      const auto& row = mdp.transition[s][a];
      for (int s2 = 0; s2 < mdp.n_states; ++s2)
        if (row[s2] > 0.0) v += mdp.discount * row[s2] * values[s2];
      q[s][a] = v;
    }
  }
  return q;
}

}  // namespace

SpibbResult spibb_policy(const TabularMdp& mle, const Fsc& behavior,
                         const BootstrapSet& unknown, const SpibbConfig& cfg) {
  cfg.validate();
  const int n_hist = mle.num_history_states();
  if (behavior.num_history_states() != n_hist || behavior.n_actions != mle.n_actions)
    throw IncompletePolicyError(
        "spibb_policy: behavior controller does not cover the estimated state space");
  if (unknown.n_history_states != n_hist || unknown.n_actions != mle.n_actions)
    throw std::invalid_argument("spibb_policy: bootstrapped set has the wrong shape");

  const MdpPolicy behavior_table = policy_table_from_fsc(mle, behavior);
  MdpPolicy policy = behavior_table;
  std::vector<double> values;
  int iterations = 0;

  for (int iter = 1; iter <= cfg.max_policy_iterations; ++iter) {
    iterations = iter;
    values = policy_evaluation(mle, policy, cfg.tol);
    const auto q = q_from_values(mle, values);

    // constrained greedy step: keep behavior mass on unknown pairs, move the
    // known mass onto the best known action
    MdpPolicy improved = policy;
    for (int h = 0; h < n_hist; ++h) {
      const auto& beta = behavior_table[h];
      int best = -1;
      double known_mass = 0.0;
      for (int a = 0; a < mle.n_actions; ++a) {
        if (unknown.contains(h, a)) continue;
        known_mass += beta[a];
        if (best < 0 || q[h][a] > q[h][best]) best = a;
      }
      auto& row = improved[h];
      if (best < 0) {
        row = beta;  // every action unknown: copy the behavior row
        continue;
      }
      for (int a = 0; a < mle.n_actions; ++a)
        row[a] = unknown.contains(h, a) ? beta[a] : 0.0;
      row[best] = known_mass;
    }
    if (improved == policy) break;
    policy = std::move(improved);
  }

  values = policy_evaluation(mle, policy, cfg.tol);
  const double rho_improved = initial_value(mle, values);
  const double rho_behavior = policy_performance(mle, behavior_table, cfg.tol);

  SpibbResult result;
  result.iterations = iterations;
  result.improved = behavior;
  for (int n = 0; n < behavior.num_nodes(); ++n)
    for (int z = 0; z < behavior.n_obs; ++z)
      result.improved.action_probs[n][z] = policy[behavior.history_index(n, z)];
  result.report = zeta_bound(
      BoundVariant::kFiniteHistoryMdp, n_hist, mle.n_actions, behavior.n_obs,
      cfg.n_wedge, cfg.delta, cfg.effective_v_max(mle.reward_max, mle.discount),
      mle.discount, rho_improved, rho_behavior);
  return result;
}

SpibbResult basic_rl_policy(const TabularMdp& mle, const Fsc& behavior,
                            const CountTable& counts, const SpibbConfig& cfg) {
  SpibbConfig unconstrained = cfg;
  unconstrained.n_wedge = 0;
  return spibb_policy(mle, behavior, bootstrapped_set(counts, 0), unconstrained);
}

SafetyReport zeta_bound(BoundVariant variant, long long state_count,
                        int action_count, int obs_count, long long n_wedge,
                        double delta, double v_max, double gamma,
                        double rho_improved_mle, double rho_behavior_mle) {
  if (state_count < 1 || action_count < 1 || obs_count < 1)
    throw std::invalid_argument("zeta_bound: empty state/action/observation count");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("zeta_bound: delta must be in (0, 1)");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("zeta_bound: gamma must be in [0, 1)");
  if (v_max < 0.0) throw std::invalid_argument("zeta_bound: v_max must be >= 0");

  SafetyReport report;
  report.variant = variant;
  report.state_count = state_count;
  report.action_count = action_count;
  report.obs_count = obs_count;
  report.n_wedge = n_wedge;
  report.delta = delta;
  report.v_max = v_max;
  report.gamma = gamma;
  report.rho_improved_mle = rho_improved_mle;
  report.rho_behavior_mle = rho_behavior_mle;

  if (n_wedge <= 0) {
    report.finite = false;
    report.epsilon = std::numeric_limits<double>::infinity();
    report.zeta = std::numeric_limits<double>::infinity();
    return report;
  }
  // log(2 * SC * A * 2^|Z| / delta), kept in log space so large |Z| cannot
  // overflow
  const double log_arg = std::log(2.0) + std::log(static_cast<double>(state_count)) +
                         std::log(static_cast<double>(action_count)) +
                         obs_count * std::log(2.0) - std::log(delta);
  report.epsilon = std::sqrt(2.0 / static_cast<double>(n_wedge) * log_arg);
  report.zeta = 4.0 * v_max / (1.0 - gamma) * report.epsilon - rho_improved_mle +
                rho_behavior_mle;
  report.finite = true;
  return report;
}

long long sufficiency_count(double zeta, double delta, long long state_count,
                            int action_count, double v_max, double gamma,
                            int obs_count) {
  if (!(zeta > 0.0)) throw std::invalid_argument("sufficiency_count: zeta must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("sufficiency_count: delta must be in (0, 1)");
  if (state_count < 1 || action_count < 1)
    throw std::invalid_argument("sufficiency_count: empty state/action set");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("sufficiency_count: gamma must be in [0, 1)");

  const double exponent_set =
      obs_count >= 0 ? static_cast<double>(obs_count) : static_cast<double>(state_count);
  const double log_arg = std::log(2.0) + std::log(static_cast<double>(state_count)) +
                         std::log(static_cast<double>(action_count)) +
                         exponent_set * std::log(2.0) - std::log(delta);
  const double rhs =
      8.0 * v_max * v_max / (zeta * zeta * (1.0 - gamma) * (1.0 - gamma)) * log_arg;
  if (rhs <= 0.0) return 0;
  return static_cast<long long>(std::ceil(rhs));
}

double weissman_check(int support_size, double m, double epsilon) {
  if (support_size < 2)
    throw std::invalid_argument("weissman_check: support size must be >= 2");
  if (!(m >= 1.0)) throw std::invalid_argument("weissman_check: m must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("weissman_check: epsilon must be positive");

  const double log_front = support_size <= 60
                               ? std::log(std::pow(2.0, support_size) - 2.0)
                               : support_size * std::log(2.0);
  const double log_bound = log_front - m * epsilon * epsilon / 2.0;
  if (log_bound >= 0.0) return 1.0;
  return std::exp(log_bound);
}

std::string safety_report_to_json(const SafetyReport& report) {
  nlohmann::json j;
  j["zeta"] = report.finite ? nlohmann::json(report.zeta) : nlohmann::json("inf");
  j["epsilon"] = report.finite ? nlohmann::json(report.epsilon) : nlohmann::json("inf");
  j["finite"] = report.finite;
  j["rho_improved_mle"] = report.rho_improved_mle;
  j["rho_behavior_mle"] = report.rho_behavior_mle;
  j["variant"] = to_string(report.variant);
  j["inputs"] = {{"state_count", report.state_count},
                 {"action_count", report.action_count},
                 {"obs_count", report.obs_count},
                 {"n_wedge", report.n_wedge},
                 {"delta", report.delta},
                 {"v_max", report.v_max},
                 {"gamma", report.gamma}};
  return j.dump(2);
}

}  // namespace spibb
