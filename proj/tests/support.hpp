// Shared helpers for the test suites: a dense linear solver used as an
// independent evaluation oracle, small random model generators, and a
// reference implementation of the window semantics.
#pragma once

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "spibb/fsc.hpp"
#include "spibb/mdp.hpp"
#include "spibb/pomdp.hpp"
#include "spibb/rng.hpp"

namespace test_support {

// Gaussian elimination with partial pivoting; small systems only.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12) throw std::runtime_error("singular system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return x;
}

// Exact policy evaluation of an MDP by solving (I - gamma P_pi) V = R_pi
// over all states except the chance-style initial state, whose value is the
// plain expectation over its row. Undefined rows follow the library's
// value-0 convention via an explicit sink completion.
inline std::vector<double> exact_policy_values(const spibb::TabularMdp& mdp,
                                               const spibb::MdpPolicy& policy) {
  const int n = mdp.n_states;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);
  for (int s = 0; s < n; ++s) {
    a[s][s] = 1.0;
    if (s == mdp.initial_state) continue;  // handled after the solve
    for (int act = 0; act < mdp.n_actions; ++act) {
      const double p = policy[s][act];
      if (p <= 0.0) continue;
      if (!mdp.defined[s][act]) continue;  // contributes 0
      rhs[s] += p * mdp.reward[s][act];
      for (int s2 = 0; s2 < n; ++s2)
        a[s][s2] -= mdp.discount * p * mdp.transition[s][act][s2];
    }
  }
  std::vector<double> values = solve_linear(a, rhs);
  if (mdp.defined[mdp.initial_state][0]) {
    double v = 0.0;
    for (int s2 = 0; s2 < n; ++s2)
      v += mdp.transition[mdp.initial_state][0][s2] * values[s2];
    values[mdp.initial_state] = v;
  }
  return values;
}

inline std::vector<double> random_distribution(spibb::Rng& rng, int n) {
  std::vector<double> row(n);
  double total = 0.0;
  for (double& v : row) {
    v = -std::log(1.0 - rng.uniform());
    total += v;
  }
  for (double& v : row) v /= total;
  return row;
}

// Random POMDP with dense rows; no terminal states unless requested.
inline spibb::Pomdp random_pomdp(spibb::Rng& rng, int ns, int na, int nz,
                                 bool with_terminal) {
  spibb::Pomdp p;
  p.state_names.resize(ns);
  p.action_names.resize(na);
  p.obs_names.resize(nz);
  for (int s = 0; s < ns; ++s) p.state_names[s] = "s" + std::to_string(s);
  for (int a = 0; a < na; ++a) p.action_names[a] = "a" + std::to_string(a);
  for (int z = 0; z < nz; ++z) p.obs_names[z] = "z" + std::to_string(z);
  p.discount = 0.9;
  p.reward_min = -1.0;
  p.reward_max = 1.0;
  p.terminal.assign(ns, false);
  const int term = with_terminal ? ns - 1 : -1;
  if (term >= 0) p.terminal[term] = true;

  p.transition.assign(ns, {});
  p.observation.assign(ns, {});
  p.reward.assign(ns, std::vector<double>(na, 0.0));
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      if (s == term) {
        std::vector<double> self(ns, 0.0);
        self[s] = 1.0;
        p.transition[s].push_back(self);
        p.reward[s][a] = 0.0;
      } else {
        p.transition[s].push_back(random_distribution(rng, ns));
        p.reward[s][a] = 2.0 * rng.uniform() - 1.0;
      }
      p.observation[s].push_back(random_distribution(rng, nz));
    }
  }
  p.initial_belief.probs = random_distribution(rng, ns);
  if (term >= 0) {
    // keep the start away from the terminal state
    double mass = p.initial_belief.probs[term];
    p.initial_belief.probs[term] = 0.0;
    for (int s = 0; s < ns; ++s)
      if (s != term) p.initial_belief.probs[s] /= (1.0 - mass);
  }
  p.validate();
  return p;
}

// Random stochastic rows on an existing controller structure.
inline spibb::Fsc randomize_policy(const spibb::Fsc& structure, spibb::Rng& rng) {
  spibb::Fsc out = structure;
  for (auto& node : out.action_probs)
    for (auto& row : node) row = random_distribution(rng, structure.n_actions);
  return out;
}

// Reference window tracker used to cross-check node evolution.
class WindowDeque {
 public:
  WindowDeque(int k, int n_obs) : k_(k), pad_(n_obs) {}

  void push(int obs) {
    window_.push_back(obs);
    if (static_cast<int>(window_.size()) > k_ - 1) window_.pop_front();
  }

  // digits oldest-first, padded to length k-1
  std::vector<int> window() const {
    std::vector<int> digits(k_ - 1, pad_);
    const int offset = k_ - 1 - static_cast<int>(window_.size());
    for (std::size_t i = 0; i < window_.size(); ++i)
      digits[offset + i] = window_[i];
    return digits;
  }

 private:
  int k_;
  int pad_;
  std::deque<int> window_;
};

}  // namespace test_support
