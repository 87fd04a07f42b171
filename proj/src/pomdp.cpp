#include "spibb/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "spibb/errors.hpp"

namespace spibb {

namespace {

constexpr double kRowTol = 1e-9;

double row_sum(const std::vector<double>& row) {
  double s = 0.0;
  for (double v : row) s += v;
  return s;
}

bool is_distribution(const std::vector<double>& row) {
  for (double v : row)
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
  return std::abs(row_sum(row) - 1.0) <= kRowTol;
}

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

}  // namespace

void Belief::validate() const {
  if (probs.empty()) fail("belief: empty");
  if (!is_distribution(probs)) fail("belief: not a distribution");
}

std::vector<double> Pomdp::initial_obs_row(StateId s) const {
  if (!initial_observation.empty()) return initial_observation[s];
  return std::vector<double>(num_obs(), 1.0 / num_obs());
}

void Pomdp::validate() const {
  const int ns = num_states(), na = num_actions(), nz = num_obs();
  if (ns == 0 || na == 0 || nz == 0) fail("pomdp: empty state/action/observation set");
  if (!(discount >= 0.0 && discount < 1.0)) fail("pomdp: discount outside [0,1)");
  if (!(reward_min <= reward_max)) fail("pomdp: reward bounds reversed");

  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) fail(what);
  };
  expect(static_cast<int>(transition.size()) == ns, "pomdp: transition table has wrong state count");
  expect(static_cast<int>(observation.size()) == ns, "pomdp: observation table has wrong state count");
  expect(static_cast<int>(reward.size()) == ns, "pomdp: reward table has wrong state count");
  expect(static_cast<int>(terminal.size()) == ns, "pomdp: terminal flags have wrong state count");

  for (int s = 0; s < ns; ++s) {
    expect(static_cast<int>(transition[s].size()) == na, "pomdp: transition row count mismatch at state " + std::to_string(s));
    expect(static_cast<int>(observation[s].size()) == na, "pomdp: observation row count mismatch at state " + std::to_string(s));
    expect(static_cast<int>(reward[s].size()) == na, "pomdp: reward row count mismatch at state " + std::to_string(s));
    for (int a = 0; a < na; ++a) {
      const auto& trow = transition[s][a];
      expect(static_cast<int>(trow.size()) == ns,
             "pomdp: transition row (state=" + std::to_string(s) + ", action=" + std::to_string(a) + ") has wrong length");
      if (!is_distribution(trow))
        fail("pomdp: transition row (state=" + std::to_string(s) + ", action=" + std::to_string(a) + ") is not a distribution");
      const auto& orow = observation[s][a];
      expect(static_cast<int>(orow.size()) == nz,
             "pomdp: observation row (state=" + std::to_string(s) + ", action=" + std::to_string(a) + ") has wrong length");
      if (!is_distribution(orow))
        fail("pomdp: observation row (state=" + std::to_string(s) + ", action=" + std::to_string(a) + ") is not a distribution");
      const double r = reward[s][a];
      if (!(r >= reward_min - kRowTol && r <= reward_max + kRowTol))
        fail("pomdp: reward (state=" + std::to_string(s) + ", action=" + std::to_string(a) + ") outside declared bounds");
    }
    if (terminal[s]) {
      for (int a = 0; a < na; ++a) {
        if (std::abs(transition[s][a][s] - 1.0) > kRowTol)
          fail("pomdp: terminal state " + std::to_string(s) + " does not self-loop under action " + std::to_string(a));
        if (reward[s][a] != 0.0)
          fail("pomdp: terminal state " + std::to_string(s) + " has nonzero reward under action " + std::to_string(a));
      }
    }
  }

  if (initial_belief.size() != ns) fail("pomdp: initial belief has wrong length");
  if (!is_distribution(initial_belief.probs)) fail("pomdp: initial belief is not a distribution");

  if (!initial_observation.empty()) {
    expect(static_cast<int>(initial_observation.size()) == ns, "pomdp: initial-observation table has wrong state count");
    for (int s = 0; s < ns; ++s) {
      expect(static_cast<int>(initial_observation[s].size()) == nz,
             "pomdp: initial-observation row (state=" + std::to_string(s) + ") has wrong length");
      if (!is_distribution(initial_observation[s]))
        fail("pomdp: initial-observation row (state=" + std::to_string(s) + ") is not a distribution");
    }
  }
}

StepResult step(const Pomdp& pomdp, StateId state, ActionId action, Rng& rng) {
  if (state < 0 || state >= pomdp.num_states())
    throw std::out_of_range("step: state index " + std::to_string(state) + " out of range");
  if (action < 0 || action >= pomdp.num_actions())
    throw std::out_of_range("step: action index " + std::to_string(action) + " out of range");
  const StateId next = rng.categorical(pomdp.transition[state][action]);
  const ObsId obs = rng.categorical(pomdp.observation[next][action]);
  return {next, obs, pomdp.reward[state][action]};
}

std::pair<StateId, ObsId> sample_initial(const Pomdp& pomdp, Rng& rng) {
  const StateId s = rng.categorical(pomdp.initial_belief.probs);
  if (!pomdp.initial_observation.empty())
    return {s, rng.categorical(pomdp.initial_observation[s])};
  return {s, rng.uniform_int(pomdp.num_obs())};
}

Belief belief_update(const Pomdp& pomdp, const Belief& belief, ActionId action,
                     ObsId obs) {
  const int ns = pomdp.num_states();
  Belief next;
  next.probs.assign(ns, 0.0);
  double total = 0.0;
  for (int s2 = 0; s2 < ns; ++s2) {
    const double likelihood = pomdp.observation[s2][action][obs];
    if (likelihood == 0.0) continue;
    double push = 0.0;
    for (int s = 0; s < ns; ++s) {
      const double b = belief[s];
      if (b > 0.0) push += pomdp.transition[s][action][s2] * b;
    }
    next.probs[s2] = likelihood * push;
    total += next.probs[s2];
  }
  if (total <= 0.0)
    throw ImpossibleObservationError(
        "belief_update: observation " + std::to_string(obs) +
        " has zero likelihood under action " + std::to_string(action));
  for (double& p : next.probs) p /= total;
  return next;
}

// ---------------------------------------------------------------------------
// JSON format

std::string pomdp_to_json(const Pomdp& pomdp) {
  nlohmann::json j;
  j["states"] = pomdp.state_names;
  j["actions"] = pomdp.action_names;
  j["observations"] = pomdp.obs_names;
  j["transition"] = pomdp.transition;
  j["observation_fn"] = pomdp.observation;
  j["reward"] = pomdp.reward;
  j["reward_bounds"] = {pomdp.reward_min, pomdp.reward_max};
  j["discount"] = pomdp.discount;
  j["initial_belief"] = pomdp.initial_belief.probs;
  std::vector<std::string> terminal_names;
  for (int s = 0; s < pomdp.num_states(); ++s)
    if (pomdp.terminal[s]) terminal_names.push_back(pomdp.state_names[s]);
  j["terminal_states"] = terminal_names;
  if (!pomdp.initial_observation.empty())
    j["initial_observation"] = pomdp.initial_observation;
  return j.dump(2);
}

Pomdp pomdp_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Pomdp p;
  p.state_names = j.at("states").get<std::vector<std::string>>();
  p.action_names = j.at("actions").get<std::vector<std::string>>();
  p.obs_names = j.at("observations").get<std::vector<std::string>>();
  p.transition = j.at("transition").get<std::vector<std::vector<std::vector<double>>>>();
  p.observation = j.at("observation_fn").get<std::vector<std::vector<std::vector<double>>>>();
  p.reward = j.at("reward").get<std::vector<std::vector<double>>>();
  const auto bounds = j.at("reward_bounds").get<std::vector<double>>();
  if (bounds.size() != 2) throw std::invalid_argument("pomdp: reward_bounds must have two entries");
  p.reward_min = bounds[0];
  p.reward_max = bounds[1];
  p.discount = j.at("discount").get<double>();
  p.initial_belief.probs = j.at("initial_belief").get<std::vector<double>>();
  p.terminal.assign(p.state_names.size(), false);
  for (const auto& name : j.at("terminal_states").get<std::vector<std::string>>()) {
    const auto it = std::find(p.state_names.begin(), p.state_names.end(), name);
    if (it == p.state_names.end())
      throw std::invalid_argument("pomdp: unknown terminal state '" + name + "'");
    p.terminal[it - p.state_names.begin()] = true;
  }
  if (j.contains("initial_observation"))
    p.initial_observation = j.at("initial_observation").get<std::vector<std::vector<double>>>();
  p.validate();
  return p;
}

void save_pomdp(const Pomdp& pomdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << pomdp_to_json(pomdp) << '\n';
}

Pomdp load_pomdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return pomdp_from_json(buf.str());
}

}  // namespace spibb
