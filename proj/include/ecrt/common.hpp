#pragma once

#include <atomic>
#include <stdexcept>
#include <string>

namespace ecrt {

// Project-wide scalar. 64-bit by default; define ECRT_SCALAR_FLOAT32 at
// configure time to trade precision for speed (property tests assume 64-bit).
#ifdef ECRT_SCALAR_FLOAT32
using Scalar = float;
#else
using Scalar = double;
#endif

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad shapes, bad hyperparameters, impossible requests.
struct ConfigError : Error {
  using Error::Error;
};

// API misuse: wrong call order, missing inputs, out-of-range labels.
struct UsageError : Error {
  using Error::Error;
};

// Numerical failure (divergence, non-finite values) at runtime.
struct NumericError : Error {
  using Error::Error;
};

// Malformed external files.
struct IngestError : Error {
  using Error::Error;
};

// Checkpoint corruption or hash mismatch.
struct IntegrityError : Error {
  using Error::Error;
};

namespace diag {

// Lightweight diagnostic sink for non-fatal conditions (degenerate critic
// directions, zero-variance coordinates). Counts per call site, prints the
// first few occurrences to stderr.
void warn(const std::string& tag, const std::string& msg);
long count(const std::string& tag);
void reset();

}  // namespace diag

}  // namespace ecrt
