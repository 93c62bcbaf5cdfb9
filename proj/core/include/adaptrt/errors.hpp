#pragma once

#include <stdexcept>
#include <string>

namespace adaptrt {

// Bad call-site input: mismatched lengths, out-of-range ids, wrong data kind.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid or illegal run configuration (bad file, unknown key, scheme/env
// pairing forbidden by the environment assumptions).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A policy without a registered exogenous-randomness decomposition was asked
// for one.
struct UnsupportedPolicyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every ensemble member had zero likelihood; no weight vector exists.
struct DegenerateEnsembleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A resampler hit an empty support and exhausted its restart budget.
struct TerminatedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adaptrt
