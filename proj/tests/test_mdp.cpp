#include "doctest.h"

#include <cmath>

#include "spibb/mdp.hpp"
#include "support.hpp"

using namespace spibb;

namespace {

// Dense random MDP over `n` history states; every row defined, initial
// distribution a point mass on state 0.
TabularMdp random_mdp(Rng& rng, int n, int na, double gamma) {
  TabularMdp mdp = TabularMdp::make(n, na, gamma, -1.0, 1.0);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < na; ++a) {
      const auto row = test_support::random_distribution(rng, n);
      for (int s2 = 0; s2 < n; ++s2) mdp.transition[s][a][s2] = row[s2];
      mdp.reward[s][a] = 2.0 * rng.uniform() - 1.0;
      mdp.defined[s][a] = true;
    }
  }
  std::vector<double> init(mdp.n_states, 0.0);
  init[0] = 1.0;
  mdp.set_initial_distribution(init);
  mdp.validate();
  return mdp;
}

}  // namespace

TEST_CASE("value iteration: single state geometric series") {
  TabularMdp mdp = TabularMdp::make(1, 1, 0.95, 0.0, 1.0);
  mdp.transition[0][0][0] = 1.0;
  mdp.reward[0][0] = 1.0;
  mdp.defined[0][0] = true;
  std::vector<double> init(mdp.n_states, 0.0);
  init[0] = 1.0;
  mdp.set_initial_distribution(init);

  const auto result = value_iteration(mdp, 1e-12);
  CHECK(result.values[0] == doctest::Approx(20.0).epsilon(1e-8));
  CHECK(initial_value(mdp, result.values) == doctest::Approx(20.0).epsilon(1e-8));
}

TEST_CASE("value iteration: two-armed bandit picks the paying arm") {
  TabularMdp mdp = TabularMdp::make(1, 2, 0.95, 0.0, 1.0);
  for (int a = 0; a < 2; ++a) {
    mdp.transition[0][a][mdp.sink_state] = 1.0;
    mdp.defined[0][a] = true;
  }
  mdp.reward[0][0] = 0.0;
  mdp.reward[0][1] = 1.0;
  std::vector<double> init(mdp.n_states, 0.0);
  init[0] = 1.0;
  mdp.set_initial_distribution(init);

  const auto result = value_iteration(mdp, 1e-12);
  CHECK(result.greedy[0] == 1);
  CHECK(result.values[0] == doctest::Approx(1.0));
}

TEST_CASE("value iteration matches exhaustive policy enumeration") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = random_mdp(rng, 5, 2, 0.9);
    const auto result = value_iteration(mdp, 1e-12);

    double best = -1e100;
    for (int mask = 0; mask < (1 << 5); ++mask) {
      MdpPolicy policy(mdp.n_states, std::vector<double>(2, 0.0));
      for (int s = 0; s < 5; ++s) policy[s][(mask >> s) & 1] = 1.0;
      policy[mdp.initial_state][0] = 1.0;
      policy[mdp.sink_state][0] = 1.0;
      const auto values = test_support::exact_policy_values(mdp, policy);
      best = std::max(best, values[mdp.initial_state]);
    }
    CHECK(initial_value(mdp, result.values) == doctest::Approx(best).epsilon(1e-7));
  }
}

TEST_CASE("value iteration: greedy policy is a fixed point of improvement") {
  Rng rng(55);
  const TabularMdp mdp = random_mdp(rng, 6, 3, 0.9);
  const auto vi = value_iteration(mdp, 1e-12);

  MdpPolicy greedy_policy(mdp.n_states, std::vector<double>(3, 0.0));
  for (int s = 0; s < mdp.n_states; ++s) greedy_policy[s][vi.greedy[s]] = 1.0;
  const auto values = policy_evaluation(mdp, greedy_policy, 1e-13);

  for (int s = 0; s < mdp.num_history_states(); ++s) {
    int best = 0;
    double best_q = -1e100;
    for (int a = 0; a < 3; ++a) {
      double q = mdp.reward[s][a];
      for (int s2 = 0; s2 < mdp.n_states; ++s2)
        q += mdp.discount * mdp.transition[s][a][s2] * values[s2];
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    CHECK(best == vi.greedy[s]);
  }
}

TEST_CASE("value iteration: undefined row reachable under greedy raises") {
  TabularMdp mdp = TabularMdp::make(2, 1, 0.9, -1.0, 1.0);
  mdp.transition[0][0][1] = 1.0;  // leads to a state with no data
  mdp.reward[0][0] = 1.0;
  mdp.defined[0][0] = true;
  std::vector<double> init(mdp.n_states, 0.0);
  init[0] = 1.0;
  mdp.set_initial_distribution(init);
  CHECK_THROWS_AS(value_iteration(mdp, 1e-10), MissingDataError);
}

TEST_CASE("policy evaluation: symmetric two-action state") {
  TabularMdp mdp = TabularMdp::make(1, 2, 0.95, 0.0, 1.0);
  for (int a = 0; a < 2; ++a) {
    mdp.transition[0][a][0] = 1.0;
    mdp.reward[0][a] = 0.7;
    mdp.defined[0][a] = true;
  }
  std::vector<double> init(mdp.n_states, 0.0);
  init[0] = 1.0;
  mdp.set_initial_distribution(init);

  MdpPolicy uniform(mdp.n_states, std::vector<double>(2, 0.5));
  const auto values = policy_evaluation(mdp, uniform, 1e-12);
  CHECK(values[0] == doctest::Approx(0.7 / 0.05).epsilon(1e-8));
}

TEST_CASE("policy evaluation agrees with value iteration on the optimal policy") {
  Rng rng(77);
  const TabularMdp mdp = random_mdp(rng, 5, 2, 0.9);
  const double tol = 1e-11;
  const auto vi = value_iteration(mdp, tol);
  MdpPolicy greedy_policy(mdp.n_states, std::vector<double>(2, 0.0));
  for (int s = 0; s < mdp.n_states; ++s) greedy_policy[s][vi.greedy[s]] = 1.0;
  const auto values = policy_evaluation(mdp, greedy_policy, tol);
  for (int s = 0; s < mdp.n_states; ++s)
    CHECK(std::abs(values[s] - vi.values[s]) <= 2e-9);
}

TEST_CASE("policy evaluation matches a direct linear solve") {
  Rng rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = random_mdp(rng, 5, 2, 0.9);
    MdpPolicy policy(mdp.n_states, std::vector<double>(2, 0.5));
    for (int s = 0; s < 5; ++s)
      policy[s] = test_support::random_distribution(rng, 2);
    const auto iterative = policy_evaluation(mdp, policy, 1e-12);
    const auto exact = test_support::exact_policy_values(mdp, policy);
    for (int s = 0; s < mdp.n_states; ++s)
      CHECK(iterative[s] == doctest::Approx(exact[s]).epsilon(1e-7));
  }
}
