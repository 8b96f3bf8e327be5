#pragma once

#include <stdexcept>
#include <string>

namespace moe {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad arguments: dimension mismatches, invalid ranges, malformed configs.
struct InputError : Error {
    using Error::Error;
};

/// A requested computation is outside what the implementation supports
/// (e.g. activation derivative order too high).
struct CapabilityError : Error {
    using Error::Error;
};

/// SGD blew up; carries the epoch at which it happened.
struct DivergenceError : Error {
    int epoch;
    DivergenceError(const std::string& what, int epoch_) : Error(what), epoch(epoch_) {}
};

/// An adversarial witness could not be built (no usable polynomial root).
struct ConstructionError : Error {
    using Error::Error;
};

}  // namespace moe
