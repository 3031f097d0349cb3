#pragma once

#include <stdexcept>
#include <string>

namespace riskformer {

// Shape disagreement between operands (dimensions named in the message).
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A call-contract violation: invalid argument values, non-scalar loss,
// negative time gaps, labels outside {0,1}.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration (non-divisible head counts, bad fractions, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data does not match the declared feature schema (wrong value arity,
// out-of-range code, malformed record).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A softmax row with no finite entry (fully masked attention/pooling row).
struct DegenerateRowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Corrupt or truncated artifact file.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checkpoint format version not supported by this build.
struct VersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A gradient audit could not be trusted (non-deterministic objective).
struct AuditError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace riskformer
