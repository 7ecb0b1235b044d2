#pragma once

#include <stdexcept>

namespace qstab {

// Bad configuration values, unknown preset/variant/method names, malformed
// config files. CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated call contract: out-of-range action, mismatched shapes,
// non-consecutive trajectory, empty input where non-empty is required.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Numerical failure during training (non-finite loss or gradient). Aborts the
// trial; the harness records it without killing sibling trials.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncated-chain enumeration would exceed the configured state budget.
struct SizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stationary solve requested on a chain with more than one closed
// communicating class; the message carries a component report.
struct MultiClassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qstab
