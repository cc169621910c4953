#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace batchts {

/// Caller violated a precondition (bad argument, unknown name, invalid config).
/// The CLI maps this to exit code 2.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// External input could not be used (unreadable file, empty dataset).
/// The CLI maps this to exit code 3.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace batchts
