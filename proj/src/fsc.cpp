#include "spibb/fsc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spibb {

namespace {

constexpr double kRowTol = 1e-9;

bool is_distribution(const std::vector<double>& row) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= kRowTol;
}

// Window digits are stored oldest-first in base (n_obs + 1); digit n_obs is
// the pre-episode pad.
int encode_window(const std::vector<int>& window, int n_obs) {
  int id = 0;
  for (int digit : window) id = id * (n_obs + 1) + digit;
  return id;
}

std::vector<int> decode_window_impl(int node, int window_len, int n_obs) {
  std::vector<int> digits(window_len, 0);
  for (int i = window_len - 1; i >= 0; --i) {
    digits[i] = node % (n_obs + 1);
    node /= (n_obs + 1);
  }
  return digits;
}

std::string window_label(const std::vector<int>& window, int n_obs,
                         const std::vector<std::string>& obs_names) {
  std::string label = "(";
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (i) label += ",";
    if (window[i] == n_obs)
      label += "-";
    else if (!obs_names.empty())
      label += obs_names[window[i]];
    else
      label += std::to_string(window[i]);
  }
  label += ")";
  return label;
}

}  // namespace

void Fsc::validate() const {
  const int nn = num_nodes();
  if (nn == 0 || n_obs <= 0 || n_actions <= 0)
    throw std::invalid_argument("fsc: empty node/observation/action set");
  if (initial_node < 0 || initial_node >= nn)
    throw std::invalid_argument("fsc: initial node out of range");
  if (static_cast<int>(memory_update.size()) != nn)
    throw std::invalid_argument("fsc: memory update has wrong node count");
  for (int n = 0; n < nn; ++n) {
    if (static_cast<int>(action_probs[n].size()) != n_obs ||
        static_cast<int>(memory_update[n].size()) != n_obs)
      throw std::invalid_argument("fsc: observation dimension mismatch at node " + std::to_string(n));
    for (int z = 0; z < n_obs; ++z) {
      if (!is_distribution(action_probs[n][z]))
        throw std::invalid_argument("fsc: action row (node=" + std::to_string(n) +
                                    ", obs=" + std::to_string(z) + ") is not a distribution");
      if (static_cast<int>(memory_update[n][z].size()) != n_actions)
        throw std::invalid_argument("fsc: memory-update row has wrong action count");
      for (int a = 0; a < n_actions; ++a) {
        const NodeId t = memory_update[n][z][a];
        if (t < 0 || t >= nn)
          throw std::invalid_argument("fsc: memory update leaves the node set at (node=" +
                                      std::to_string(n) + ", obs=" + std::to_string(z) +
                                      ", action=" + std::to_string(a) + ")");
      }
    }
  }
}

Fsc make_k_window_fsc(int k, int n_obs, int n_actions,
                      const std::vector<std::string>& obs_names) {
  if (k < 1) throw std::invalid_argument("make_k_window_fsc: k must be >= 1");
  if (n_obs < 1 || n_actions < 1)
    throw std::invalid_argument("make_k_window_fsc: empty observation or action set");
  const int window_len = k - 1;
  int n_nodes = 1;
  for (int i = 0; i < window_len; ++i) n_nodes *= n_obs + 1;

  Fsc fsc;
  fsc.n_obs = n_obs;
  fsc.n_actions = n_actions;
  fsc.window = k;
  fsc.action_probs.assign(
      n_nodes, std::vector<std::vector<double>>(
                   n_obs, std::vector<double>(n_actions, 1.0 / n_actions)));
  fsc.memory_update.assign(
      n_nodes, std::vector<std::vector<NodeId>>(n_obs, std::vector<NodeId>(n_actions, 0)));
  fsc.node_labels.resize(n_nodes);

  for (int n = 0; n < n_nodes; ++n) {
    const auto window = decode_window_impl(n, window_len, n_obs);
    fsc.node_labels[n] = window_label(window, n_obs, obs_names);
    for (int z = 0; z < n_obs; ++z) {
      // shift: drop the oldest entry, append the current observation
      std::vector<int> next(window.begin() + (window_len > 0 ? 1 : 0), window.end());
      if (window_len > 0) next.push_back(z);
      const NodeId target = encode_window(next, n_obs);
      for (int a = 0; a < n_actions; ++a) fsc.memory_update[n][z][a] = target;
    }
  }
  std::vector<int> pads(window_len, n_obs);
  fsc.initial_node = encode_window(pads, n_obs);
  return fsc;
}

std::pair<int, NodeId> fsc_step(const Fsc& fsc, NodeId node, int obs, Rng& rng) {
  if (node < 0 || node >= fsc.num_nodes())
    throw std::out_of_range("fsc_step: node out of range");
  if (obs < 0 || obs >= fsc.n_obs)
    throw std::out_of_range("fsc_step: observation out of range");
  const int action = rng.categorical(fsc.action_probs[node][obs]);
  return {action, fsc.memory_update[node][obs][action]};
}

Fsc fsc_from_table(const Fsc& structure,
                   const std::vector<std::vector<std::vector<double>>>& action_table) {
  if (static_cast<int>(action_table.size()) != structure.num_nodes())
    throw IncompletePolicyError("fsc_from_table: table has wrong node count");
  for (int n = 0; n < structure.num_nodes(); ++n) {
    if (static_cast<int>(action_table[n].size()) != structure.n_obs)
      throw IncompletePolicyError("fsc_from_table: missing observation rows at node " +
                                  std::to_string(n));
    for (int z = 0; z < structure.n_obs; ++z) {
      if (static_cast<int>(action_table[n][z].size()) != structure.n_actions ||
          !is_distribution(action_table[n][z]))
        throw IncompletePolicyError("fsc_from_table: row (node=" + std::to_string(n) +
                                    ", obs=" + std::to_string(z) +
                                    ") is missing or not a distribution");
    }
  }
  Fsc out = structure;
  out.action_probs = action_table;
  return out;
}

std::vector<int> decode_window(const Fsc& fsc, NodeId node) {
  if (fsc.window < 1)
    throw std::invalid_argument("decode_window: not a window-structured controller");
  return decode_window_impl(node, fsc.window - 1, fsc.n_obs);
}

Fsc lift_window_fsc(const Fsc& fsc, int k_prime) {
  if (fsc.window < 1)
    throw std::invalid_argument("lift_window_fsc: source is not a window controller");
  if (k_prime < fsc.window)
    throw std::invalid_argument("lift_window_fsc: cannot shrink the window");
  if (k_prime == fsc.window) return fsc;

  Fsc out = make_k_window_fsc(k_prime, fsc.n_obs, fsc.n_actions);
  const int src_len = fsc.window - 1;
  for (int n = 0; n < out.num_nodes(); ++n) {
    const auto window = decode_window_impl(n, k_prime - 1, fsc.n_obs);
    const std::vector<int> tail(window.end() - src_len, window.end());
    const NodeId src = encode_window(tail, fsc.n_obs);
    for (int z = 0; z < fsc.n_obs; ++z) out.action_probs[n][z] = fsc.action_probs[src][z];
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

std::string fsc_to_json(const Fsc& fsc) {
  nlohmann::json j;
  j["n_obs"] = fsc.n_obs;
  j["n_actions"] = fsc.n_actions;
  j["initial_node"] = fsc.initial_node;
  j["window"] = fsc.window;
  j["node_labels"] = fsc.node_labels;
  j["action_probs"] = fsc.action_probs;
  j["memory_update"] = fsc.memory_update;
  return j.dump(2);
}

Fsc fsc_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Fsc fsc;
  fsc.n_obs = j.at("n_obs").get<int>();
  fsc.n_actions = j.at("n_actions").get<int>();
  fsc.initial_node = j.at("initial_node").get<int>();
  fsc.window = j.at("window").get<int>();
  fsc.node_labels = j.at("node_labels").get<std::vector<std::string>>();
  fsc.action_probs = j.at("action_probs").get<std::vector<std::vector<std::vector<double>>>>();
  fsc.memory_update = j.at("memory_update").get<std::vector<std::vector<std::vector<NodeId>>>>();
  fsc.validate();
  return fsc;
}

void save_fsc(const Fsc& fsc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << fsc_to_json(fsc) << '\n';
}

Fsc load_fsc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return fsc_from_json(buf.str());
}

}  // namespace spibb
