#include "doctest.h"

#include <cmath>

#include "spibb/fsc.hpp"
#include "support.hpp"

using namespace spibb;

TEST_CASE("k-window node counts") {
  CHECK(make_k_window_fsc(1, 4, 2).num_nodes() == 1);
  CHECK(make_k_window_fsc(1, 4, 2).num_history_states() == 4);

  const Fsc k2 = make_k_window_fsc(2, 2, 3);
  CHECK(k2.num_nodes() == 3);  // pad, z0, z1
  CHECK(k2.num_history_states() == 6);

  CHECK(make_k_window_fsc(3, 2, 2).num_nodes() == 9);
  CHECK(make_k_window_fsc(4, 3, 2).num_nodes() == 64);
}

TEST_CASE("window shift semantics against a reference deque") {
  Rng rng(17);
  for (int k : {1, 2, 3, 4}) {
    for (int nz : {2, 3}) {
      const Fsc fsc = make_k_window_fsc(k, nz, 2);
      for (int trial = 0; trial < 20; ++trial) {
        NodeId node = fsc.initial_node;
        test_support::WindowDeque reference(k, nz);
        for (int t = 0; t < 30; ++t) {
          CHECK(decode_window(fsc, node) == reference.window());
          const int z = rng.uniform_int(nz);
          const int a = rng.uniform_int(2);
          node = fsc.eta(node, z, a);
          reference.push(z);
        }
      }
    }
  }
}

TEST_CASE("eta is deterministic and action-independent for window structures") {
  const Fsc fsc = make_k_window_fsc(3, 2, 3);
  for (int n = 0; n < fsc.num_nodes(); ++n)
    for (int z = 0; z < 2; ++z) {
      const NodeId first = fsc.eta(n, z, 0);
      CHECK(fsc.eta(n, z, 0) == first);
      for (int a = 1; a < 3; ++a) CHECK(fsc.eta(n, z, a) == first);
    }
}

TEST_CASE("fsc_step: point-mass policy always returns that action") {
  Fsc fsc = make_k_window_fsc(2, 2, 3);
  for (auto& node : fsc.action_probs)
    for (auto& row : node) row = {0.0, 0.0, 1.0};
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto [action, next] = fsc_step(fsc, 0, 0, rng);
    (void)next;
    CHECK(action == 2);
  }
}

TEST_CASE("fsc_step: pad node shifts the observation in") {
  const Fsc fsc = make_k_window_fsc(2, 2, 2);
  Rng rng(5);
  const auto [action, next] = fsc_step(fsc, fsc.initial_node, 1, rng);
  (void)action;
  CHECK(decode_window(fsc, next) == std::vector<int>{1});
}

TEST_CASE("fsc_step: sampling frequency matches psi") {
  Fsc fsc = make_k_window_fsc(1, 1, 2);
  fsc.action_probs[0][0] = {0.25, 0.75};
  Rng rng(99);
  const int n = 100000;
  int count_a1 = 0;
  for (int i = 0; i < n; ++i)
    if (fsc_step(fsc, 0, 0, rng).first == 1) ++count_a1;
  const double freq = static_cast<double>(count_a1) / n;
  CHECK(freq >= 0.7457);
  CHECK(freq <= 0.7543);
}

TEST_CASE("fsc_from_table: identity reproduces the controller") {
  Rng rng(31);
  const Fsc base = test_support::randomize_policy(make_k_window_fsc(2, 2, 3), rng);
  const Fsc copy = fsc_from_table(base, base.action_probs);
  CHECK(copy.action_probs == base.action_probs);
  CHECK(copy.memory_update == base.memory_update);
  CHECK(copy.initial_node == base.initial_node);
}

TEST_CASE("fsc_from_table: non-normalized row is rejected") {
  const Fsc base = make_k_window_fsc(2, 2, 3);
  auto table = base.action_probs;
  table[1][0] = {0.5, 0.2, 0.2};
  CHECK_THROWS_AS(fsc_from_table(base, table), IncompletePolicyError);

  auto missing = base.action_probs;
  missing.pop_back();
  CHECK_THROWS_AS(fsc_from_table(base, missing), IncompletePolicyError);
}

TEST_CASE("lifting a window controller preserves behavior") {
  Rng rng(47);
  const Fsc source = test_support::randomize_policy(make_k_window_fsc(2, 3, 2), rng);
  const Fsc lifted = lift_window_fsc(source, 4);
  CHECK(lifted.window == 4);

  // walk both controllers along random observation streams; the lifted rows
  // must match the source rows step for step
  for (int trial = 0; trial < 50; ++trial) {
    NodeId n_src = source.initial_node;
    NodeId n_lift = lifted.initial_node;
    for (int t = 0; t < 25; ++t) {
      const int z = rng.uniform_int(3);
      CHECK(lifted.action_probs[n_lift][z] == source.action_probs[n_src][z]);
      const int a = rng.uniform_int(2);
      n_src = source.eta(n_src, z, a);
      n_lift = lifted.eta(n_lift, z, a);
    }
  }
}

TEST_CASE("fsc json round trip is exact") {
  Rng rng(83);
  const Fsc fsc = test_support::randomize_policy(make_k_window_fsc(3, 2, 3), rng);
  const std::string text = fsc_to_json(fsc);
  const Fsc parsed = fsc_from_json(text);
  CHECK(parsed.action_probs == fsc.action_probs);  // bit-exact doubles
  CHECK(fsc_to_json(parsed) == text);
}
