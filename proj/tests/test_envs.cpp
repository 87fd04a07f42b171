#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "spibb/envs.hpp"
#include "support.hpp"

using namespace spibb;

namespace {

int live_states(const Pomdp& p) {
  int n = 0;
  for (int s = 0; s < p.num_states(); ++s)
    if (!p.terminal[s]) ++n;
  return n;
}

}  // namespace

TEST_CASE("tiger rewards and shape") {
  const EnvSpec env = make_tiger();
  const Pomdp& p = env.pomdp;
  p.validate();
  CHECK(live_states(p) == 2);
  CHECK(p.num_obs() == 2);
  CHECK(p.num_actions() == 3);
  CHECK(p.reward[0][1] == doctest::Approx(-100.0));  // tiger-left, open-left
  CHECK(p.reward[0][2] == doctest::Approx(10.0));    // tiger-left, open-right
  CHECK(p.reward[1][1] == doctest::Approx(10.0));
  CHECK(p.reward[1][2] == doctest::Approx(-100.0));
  CHECK(p.discount == doctest::Approx(0.95));

  // opening ends the episode
  CHECK(p.transition[0][1][2] == doctest::Approx(1.0));
  CHECK(p.terminal[2]);
}

TEST_CASE("tiger: perfect accuracy gives a point-mass belief after one listen") {
  const EnvSpec env = make_tiger(1.0);
  Belief b;
  b.probs = {0.5, 0.5, 0.0};
  const Belief after = belief_update(env.pomdp, b, 0, 0);
  CHECK(after[0] == doctest::Approx(1.0));
  CHECK(after[1] == doctest::Approx(0.0));
}

TEST_CASE("tiger rejects out-of-range accuracy") {
  CHECK_THROWS_AS(make_tiger(0.3), std::invalid_argument);
  CHECK_THROWS_AS(make_tiger(1.2), std::invalid_argument);
}

TEST_CASE("voicemail rewards and shape") {
  const EnvSpec env = make_voicemail();
  const Pomdp& p = env.pomdp;
  p.validate();
  CHECK(live_states(p) == 2);
  CHECK(p.num_obs() == 2);
  CHECK(p.num_actions() == 3);
  CHECK(p.reward[0][1] == doctest::Approx(5.0));    // save intent, save
  CHECK(p.reward[1][1] == doctest::Approx(-10.0));  // delete intent, save
  CHECK(p.reward[0][2] == doctest::Approx(-20.0));  // save intent, delete
  CHECK(p.reward[1][2] == doctest::Approx(5.0));
  CHECK(p.initial_belief[0] == doctest::Approx(0.65));
}

TEST_CASE("voicemail: uninformative ask keeps the prior") {
  const EnvSpec env = make_voicemail(0.65, 0.5);
  Belief prior;
  prior.probs = {0.65, 0.35, 0.0};
  const Belief after = belief_update(env.pomdp, prior, 0, 0);
  CHECK(after[0] == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(after[1] == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("voicemail rejects out-of-range parameters") {
  CHECK_THROWS_AS(make_voicemail(0.0, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(make_voicemail(0.65, 1.0), std::invalid_argument);
}

TEST_CASE("cheese maze: layout, goal rewards and aliasing") {
  const EnvSpec env = make_cheese_maze();
  const Pomdp& p = env.pomdp;
  p.validate();
  CHECK(p.num_states() == 11);
  CHECK(p.num_actions() == 4);

  // independent recount of distinct wall patterns from the same layout
  const char* rows[3] = {".....", ".#.#.", ".#C#."};
  std::set<std::vector<bool>> patterns;
  int free_cells = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) {
      if (rows[r][c] == '#') continue;
      ++free_cells;
      std::vector<bool> walls(4);
      const int dr[4] = {-1, 0, 1, 0}, dc[4] = {0, 1, 0, -1};
      for (int d = 0; d < 4; ++d) {
        const int rr = r + dr[d], cc = c + dc[d];
        walls[d] = rr < 0 || rr >= 3 || cc < 0 || cc >= 5 || rows[rr][cc] == '#';
      }
      patterns.insert(walls);
    }
  CHECK(free_cells == 11);
  CHECK(p.num_obs() == static_cast<int>(patterns.size()));

  // aliasing: strictly fewer observations than locations
  CHECK(p.num_obs() < p.num_states());

  int goal = -1;
  for (int s = 0; s < p.num_states(); ++s)
    if (p.terminal[s]) {
      CHECK(goal == -1);
      goal = s;
    }
  REQUIRE(goal >= 0);
  CHECK(p.initial_belief[goal] == doctest::Approx(0.0));

  // stepping into the goal pays +1; every other step costs 0.01
  int goal_entries = 0;
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.terminal[s]) continue;
    for (int a = 0; a < 4; ++a) {
      if (p.transition[s][a][goal] == 1.0) {
        CHECK(p.reward[s][a] == doctest::Approx(1.0));
        ++goal_entries;
      } else {
        CHECK(p.reward[s][a] == doctest::Approx(-0.01));
      }
    }
  }
  CHECK(goal_entries == 1);  // only from straight above

  // the start percept reveals the start location's wall pattern
  REQUIRE_FALSE(p.initial_observation.empty());
  for (int s = 0; s < p.num_states(); ++s) {
    double top = 0.0;
    for (double v : p.initial_observation[s]) top = std::max(top, v);
    CHECK(top == doctest::Approx(1.0));
  }
}

TEST_CASE("environments export to the pomdp file format exactly") {
  for (const char* name : {"tiger", "voicemail", "cheesemaze"}) {
    const EnvSpec env = make_env(name);
    const std::string text = pomdp_to_json(env.pomdp);
    const Pomdp parsed = pomdp_from_json(text);
    CHECK(pomdp_to_json(parsed) == text);
  }
}

TEST_CASE("make_env rejects unknown names") {
  CHECK_THROWS_AS(make_env("atlantis"), std::invalid_argument);
}
