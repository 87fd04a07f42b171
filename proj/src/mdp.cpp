#include "spibb/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spibb {

namespace {

constexpr double kRowTol = 1e-9;
constexpr long long kMaxSweeps = 2000000;

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

}  // namespace

TabularMdp TabularMdp::make(int n_history_states, int n_actions,
                            double discount, double reward_min,
                            double reward_max) {
  TabularMdp m;
  m.n_states = n_history_states + 2;
  m.n_actions = n_actions;
  m.discount = discount;
  m.reward_min = reward_min;
  m.reward_max = reward_max;
  m.initial_state = n_history_states;
  m.sink_state = n_history_states + 1;
  m.transition.assign(m.n_states, std::vector<std::vector<double>>(
                                      n_actions, std::vector<double>(m.n_states, 0.0)));
  m.reward.assign(m.n_states, std::vector<double>(n_actions, 0.0));
  m.defined.assign(m.n_states, std::vector<bool>(n_actions, false));
  m.counts.assign(m.n_states, std::vector<long long>(n_actions, 0));
  m.pair_counts.assign(m.n_states, std::vector<std::vector<long long>>(
                                       n_actions, std::vector<long long>(m.n_states, 0)));
  m.state_names.assign(m.n_states, "");
  m.state_names[m.initial_state] = "<start>";
  m.state_names[m.sink_state] = "<sink>";
  for (int a = 0; a < n_actions; ++a) {
    m.transition[m.sink_state][a][m.sink_state] = 1.0;
    m.defined[m.sink_state][a] = true;
  }
  return m;
}

void TabularMdp::set_initial_distribution(const std::vector<double>& dist) {
  if (static_cast<int>(dist.size()) != n_states)
    fail("mdp: initial distribution has wrong length");
  for (int a = 0; a < n_actions; ++a) {
    transition[initial_state][a] = dist;
    reward[initial_state][a] = 0.0;
    defined[initial_state][a] = true;
  }
}

void TabularMdp::validate() const {
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      if (!defined[s][a]) continue;
      double sum = 0.0;
      for (double v : transition[s][a]) {
        if (!(v >= 0.0) || !std::isfinite(v))
          fail("mdp: negative or non-finite transition entry at (state=" +
               std::to_string(s) + ", action=" + std::to_string(a) + ")");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowTol)
        fail("mdp: transition row (state=" + std::to_string(s) +
             ", action=" + std::to_string(a) + ") sums to " + std::to_string(sum));
      if (s != initial_state && s != sink_state) {
        const double r = reward[s][a];
        if (!(r >= reward_min - kRowTol && r <= reward_max + kRowTol))
          fail("mdp: reward at (state=" + std::to_string(s) + ", action=" +
               std::to_string(a) + ") outside source bounds");
      }
      long long pc = 0;
      for (long long c : pair_counts[s][a]) {
        if (c < 0) fail("mdp: negative pair count");
        pc += c;
      }
      if (pc != counts[s][a])
        fail("mdp: pair counts at (state=" + std::to_string(s) + ", action=" +
             std::to_string(a) + ") do not sum to the pair's count");
    }
  }
}

namespace {

double q_value(const TabularMdp& mdp, const std::vector<double>& values, int s,
               int a) {
  const auto& row = mdp.transition[s][a];
  double exp_next = 0.0;
  for (int s2 = 0; s2 < mdp.n_states; ++s2) {
    const double p = row[s2];
    if (p > 0.0) exp_next += p * values[s2];
  }
  return mdp.reward[s][a] + mdp.discount * exp_next;
}

double chance_value(const TabularMdp& mdp, const std::vector<double>& values) {
  const auto& row = mdp.transition[mdp.initial_state][0];
  double v = 0.0;
  for (int s2 = 0; s2 < mdp.n_states; ++s2)
    if (row[s2] > 0.0) v += row[s2] * values[s2];
  return v;
}

// Throws when a state without any defined row is reachable from the initial
// state under the given deterministic action choice.
void check_reachable_defined(const TabularMdp& mdp,
                             const std::vector<int>& choice) {
  std::vector<bool> seen(mdp.n_states, false);
  std::vector<int> stack;
  if (!mdp.defined[mdp.initial_state][0]) return;  // no start row: nothing to walk
  stack.push_back(mdp.initial_state);
  seen[mdp.initial_state] = true;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    const bool any_defined = [&] {
      for (int a = 0; a < mdp.n_actions; ++a)
        if (mdp.defined[s][a]) return true;
      return false;
    }();
    if (!any_defined)
      throw MissingDataError("state " + std::to_string(s) +
                             " is reachable under the greedy policy but has no model row");
    const int a = s == mdp.initial_state ? 0 : choice[s];
    if (!mdp.defined[s][a]) continue;
    const auto& row = mdp.transition[s][a];
    for (int s2 = 0; s2 < mdp.n_states; ++s2) {
      if (row[s2] > 0.0 && !seen[s2]) {
        seen[s2] = true;
        stack.push_back(s2);
      }
    }
  }
}

}  // namespace

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  std::vector<double> values(mdp.n_states, 0.0);
  std::vector<double> next(mdp.n_states, 0.0);
  for (long long sweep = 0;; ++sweep) {
    if (sweep > kMaxSweeps)
      throw std::runtime_error("value_iteration: did not converge");
    double residual = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      double best;
      if (s == mdp.initial_state) {
        best = mdp.defined[s][0] ? chance_value(mdp, values) : 0.0;
      } else {
        best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.n_actions; ++a)
          if (mdp.defined[s][a]) best = std::max(best, q_value(mdp, values, s, a));
        if (!std::isfinite(best)) best = 0.0;  // no data: resolved by reachability check
      }
      next[s] = best;
      residual = std::max(residual, std::abs(next[s] - values[s]));
    }
    values.swap(next);
    if (residual <= tol) break;
  }

  ValueIterationResult result;
  result.values = values;
  result.q_values.assign(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
  result.greedy.assign(mdp.n_states, 0);
  for (int s = 0; s < mdp.n_states; ++s) {
    if (s == mdp.initial_state) continue;
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      if (!mdp.defined[s][a]) continue;
      const double q = q_value(mdp, values, s, a);
      result.q_values[s][a] = q;
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    result.greedy[s] = best_a;
  }
  check_reachable_defined(mdp, result.greedy);
  return result;
}

std::vector<double> policy_evaluation(const TabularMdp& mdp,
                                      const MdpPolicy& policy, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("policy_evaluation: tol must be positive");
  if (static_cast<int>(policy.size()) != mdp.n_states)
    throw IncompletePolicyError("policy_evaluation: policy has wrong state count");
  std::vector<double> values(mdp.n_states, 0.0);
  std::vector<double> next(mdp.n_states, 0.0);
  for (long long sweep = 0;; ++sweep) {
    if (sweep > kMaxSweeps)
      throw std::runtime_error("policy_evaluation: did not converge");
    double residual = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      double v = 0.0;
      if (s == mdp.initial_state) {
        v = mdp.defined[s][0] ? chance_value(mdp, values) : 0.0;
      } else {
        const auto& row = policy[s];
        if (static_cast<int>(row.size()) != mdp.n_actions)
          throw IncompletePolicyError("policy_evaluation: policy row at state " +
                                      std::to_string(s) + " has wrong length");
        for (int a = 0; a < mdp.n_actions; ++a) {
          const double p = row[a];
          if (p <= 0.0) continue;
          // undefined rows contribute 0, the sink-jump convention
          if (mdp.defined[s][a]) v += p * q_value(mdp, values, s, a);
        }
      }
      next[s] = v;
      residual = std::max(residual, std::abs(next[s] - values[s]));
    }
    values.swap(next);
    if (residual <= tol) break;
  }
  return values;
}

double initial_value(const TabularMdp& mdp, const std::vector<double>& values) {
  if (!mdp.defined[mdp.initial_state][0])
    throw MissingDataError("mdp: initial distribution was never set");
  return chance_value(mdp, values);
}

double policy_performance(const TabularMdp& mdp, const MdpPolicy& policy,
                          double tol) {
  return initial_value(mdp, policy_evaluation(mdp, policy, tol));
}

}  // namespace spibb
