#include "doctest.h"

#include <cmath>

#include "spibb/envs.hpp"
#include "spibb/errors.hpp"
#include "spibb/pomdp.hpp"
#include "support.hpp"

using namespace spibb;

namespace {

Pomdp one_state_pomdp(double reward_value = 0.5) {
  Pomdp p;
  p.state_names = {"s"};
  p.action_names = {"a"};
  p.obs_names = {"z"};
  p.transition = {{{1.0}}};
  p.observation = {{{1.0}}};
  p.reward = {{reward_value}};
  p.reward_min = 0.0;
  p.reward_max = 1.0;
  p.discount = 0.95;
  p.initial_belief.probs = {1.0};
  p.terminal = {false};
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("step on a degenerate one-state model") {
  const Pomdp p = one_state_pomdp();
  Rng rng(7);
  const StepResult r = step(p, 0, 0, rng);
  CHECK(r.next_state == 0);
  CHECK(r.obs == 0);
  CHECK(r.reward == doctest::Approx(0.5));
}

TEST_CASE("step rejects invalid indices") {
  const Pomdp p = one_state_pomdp();
  Rng rng(7);
  CHECK_THROWS_AS(step(p, 1, 0, rng), std::out_of_range);
  CHECK_THROWS_AS(step(p, 0, -1, rng), std::out_of_range);
}

TEST_CASE("tiger: listening never moves the tiger and costs 1") {
  const EnvSpec env = make_tiger();
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const StepResult r = step(env.pomdp, 0, 0, rng);
    CHECK(r.next_state == 0);
    CHECK(r.reward == doctest::Approx(-1.0));
  }
}

TEST_CASE("tiger: listen observation frequency matches the accuracy") {
  const EnvSpec env = make_tiger(0.85);
  Rng rng(42);
  const int n = 1000000;
  int hear_left = 0;
  for (int i = 0; i < n; ++i) {
    const StepResult r = step(env.pomdp, 0, 0, rng);
    if (r.obs == 0) ++hear_left;
  }
  const double freq = static_cast<double>(hear_left) / n;
  CHECK(freq >= 0.8489);
  CHECK(freq <= 0.8511);
}

TEST_CASE("sampled step frequencies follow the transition row") {
  Rng gen(11);
  const Pomdp p = test_support::random_pomdp(gen, 4, 2, 3, false);
  Rng rng(5);
  const int n = 200000;
  std::vector<int> state_counts(4, 0);
  for (int i = 0; i < n; ++i) state_counts[step(p, 1, 0, rng).next_state]++;
  for (int s = 0; s < 4; ++s) {
    const double q = p.transition[1][0][s];
    const double sigma = std::sqrt(q * (1 - q) / n);
    CHECK(std::abs(state_counts[s] / static_cast<double>(n) - q) <= 3.5 * sigma + 1e-9);
  }
}

TEST_CASE("belief update: deterministic model moves the point mass") {
  Pomdp p;
  p.state_names = {"s0", "s1"};
  p.action_names = {"go"};
  p.obs_names = {"z"};
  p.transition = {{{0.0, 1.0}}, {{1.0, 0.0}}};
  p.observation = {{{1.0}}, {{1.0}}};
  p.reward = {{0.0}, {0.0}};
  p.reward_min = 0.0;
  p.reward_max = 0.0;
  p.discount = 0.9;
  p.initial_belief.probs = {1.0, 0.0};
  p.terminal = {false, false};
  p.validate();

  Belief b;
  b.probs = {1.0, 0.0};
  const Belief next = belief_update(p, b, 0, 0);
  CHECK(next[0] == doctest::Approx(0.0));
  CHECK(next[1] == doctest::Approx(1.0));
}

TEST_CASE("belief update: tiger one-step Bayes") {
  const EnvSpec env = make_tiger(0.85);
  Belief uniform;
  uniform.probs = {0.5, 0.5, 0.0};
  const Belief b = belief_update(env.pomdp, uniform, 0, 0);  // listen, hear-left
  CHECK(b[0] == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(b[1] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(b[2] == doctest::Approx(0.0));
}

TEST_CASE("belief update: uninformative observation is a pure push-forward") {
  Rng gen(19);
  Pomdp p = test_support::random_pomdp(gen, 3, 2, 2, false);
  // make the observation state-independent
  for (int s = 0; s < 3; ++s) p.observation[s][0] = {0.3, 0.7};

  Belief b;
  b.probs = {0.2, 0.5, 0.3};
  const Belief next = belief_update(p, b, 0, 1);
  for (int s2 = 0; s2 < 3; ++s2) {
    double push = 0.0;
    for (int s = 0; s < 3; ++s) push += p.transition[s][0][s2] * b[s];
    CHECK(next[s2] == doctest::Approx(push).epsilon(1e-12));
  }
}

TEST_CASE("belief update: zero-likelihood observation raises") {
  Pomdp p = one_state_pomdp();
  p.obs_names = {"z0", "z1"};
  p.observation = {{{1.0, 0.0}}};
  p.initial_observation.clear();
  p.validate();
  Belief b;
  b.probs = {1.0};
  CHECK_THROWS_AS(belief_update(p, b, 0, 1), ImpossibleObservationError);
}

TEST_CASE("belief update preserves normalization on random models") {
  Rng gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Pomdp p = test_support::random_pomdp(gen, 4, 2, 3, false);
    Belief b;
    b.probs = test_support::random_distribution(gen, 4);
    for (int step_i = 0; step_i < 10; ++step_i) {
      const int a = gen.uniform_int(2);
      const int z = gen.uniform_int(3);
      b = belief_update(p, b, a, z);
      double total = 0.0;
      for (double v : b.probs) {
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("pomdp json round trip and validation reporting") {
  const EnvSpec env = make_cheese_maze();
  const std::string text = pomdp_to_json(env.pomdp);
  const Pomdp parsed = pomdp_from_json(text);
  CHECK(pomdp_to_json(parsed) == text);  // exact round trip

  // first violated row is named
  Pomdp broken = parsed;
  broken.transition[3][1][0] += 0.5;
  try {
    broken.validate();
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find("state=3") != std::string::npos);
    CHECK(what.find("action=1") != std::string::npos);
  }
}
