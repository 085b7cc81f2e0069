#pragma once

#include <stdexcept>
#include <string>

namespace fdqn {

// Base of every error this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration value or malformed config input.
struct ConfigError : Error {
    using Error::Error;
};

// A caller broke a documented precondition (shape mismatch, index out of range).
struct ContractViolation : Error {
    using Error::Error;
};

// NaN/Inf showed up where finite values are required.
struct NumericError : Error {
    using Error::Error;
};

// Requested operation needs more data than is available yet (e.g. sampling an
// underfilled replay buffer).
struct NotReadyError : Error {
    using Error::Error;
};

// Checkpoint file failed a structural check; message names the failed check.
struct CorruptCheckpoint : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// API misuse that is not a shape/range problem (e.g. step() after done).
struct UsageError : Error {
    using Error::Error;
};

}  // namespace fdqn
