#pragma once

#include <stdexcept>
#include <string>

namespace agentcodec {

// Endpoint unreachable, all retries exhausted, or every branch of a
// fan-out failed.
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// A feature was requested that the backend does not provide (e.g. logprobs
// on a backend without them). Raised before any call is made; never a
// silent degradation.
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration or arguments (unlisted code rate, dimension mismatch,
// empty cache, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace agentcodec
