#ifndef MPT_ERRORS_HPP
#define MPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mpt {

// Tensor shapes do not compose for the requested operation.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value (bad exponent, prune ratio, scope, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed external data (dataset files, checkpoints).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training cannot continue (divergent loss, fully pruned layer).
struct TrainAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mpt

#endif  // MPT_ERRORS_HPP
