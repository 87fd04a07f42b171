#pragma once

#include <map>
#include <string>

#include "spibb/pomdp.hpp"

namespace spibb {

/// A named benchmark POMDP plus the parameter values it was built with and
/// a note on which numbers are fixed by the task and which are defaults.
struct EnvSpec {
  std::string name;
  Pomdp pomdp;
  std::map<std::string, double> params;
  std::string provenance_notes;
};

/// Tiger: a tiger hides behind one of two doors. Listening keeps the state
/// and yields a noisy position observation (reward -1); opening a door ends
/// the episode with -100 (tiger) or +10 (safe door). The start percept is
/// uninformative.
EnvSpec make_tiger(double listen_accuracy = 0.85);

/// Voicemail: the caller's hidden intent is save or delete. Asking costs -1
/// and yields a noisy intent observation; save earns +5 / -10, delete +5 /
/// -20, both ending the episode. The start percept is uninformative.
EnvSpec make_voicemail(double intent_prior = 0.65, double ask_accuracy = 0.8);

/// CheeseMaze: the 11-location maze with four move actions (bumping into a
/// wall stays in place) where the agent only perceives the wall pattern
/// around its location, so several locations look alike. Reaching the goal
/// pays +1 and ends the episode; every other step costs 0.01. The start
/// location is uniform over the non-goal cells and the start percept is the
/// start location's wall pattern.
EnvSpec make_cheese_maze();

/// Lookup by name ("tiger", "voicemail", "cheesemaze") or "file:<path>".
EnvSpec make_env(const std::string& name);

/// Per-environment defaults for behavior-policy generation (softmax
/// temperature), keyed by environment name.
double default_softmax_tau(const std::string& env_name);

}  // namespace spibb
