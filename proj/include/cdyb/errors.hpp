#pragma once
#include <stdexcept>
#include <string>

namespace cdyb {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// mismatched systems, wrong dimensions, malformed inputs
struct StructuralError : Error {
  using Error::Error;
};

// input outside the analytic domain (poles, singular maps, wrong parity)
struct DomainError : Error {
  using Error::Error;
};

// series did not converge, unexpected non-finite values
struct NumericError : Error {
  using Error::Error;
};

struct ConfigParseError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

// request does not apply (odd dimension for a Pfaffian, missing split, ...)
struct UsageError : Error {
  using Error::Error;
};

// no admissible samples could be drawn
struct GuardExhaustion : Error {
  using Error::Error;
};

} // namespace cdyb
