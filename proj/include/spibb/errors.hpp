#pragma once

#include <stdexcept>

namespace spibb {

/// An (action, observation) pair with zero likelihood under the current
/// belief. Callers decide whether this is a dead branch or a bug.
class ImpossibleObservationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A policy table is missing a reachable row or carries an invalid row.
class IncompletePolicyError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A dataset is inconsistent with the controller that supposedly produced it.
class CorruptDatasetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A solver needs a state-action row for which there is no model data.
class MissingDataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spibb
