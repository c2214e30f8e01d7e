#pragma once

#include <stdexcept>
#include <string>

namespace valiron {

enum class ErrorKind {
  domain,                   // point outside the ball or the Siegel domain
  boundary_input,           // boundary point handed to a map that needs an interior one
  invalid_parameter,
  scale_overflow,           // raw iterate grew past the overflow threshold
  not_tending_to_infinity,
  orbit_too_short,
  non_restricted,
  missing_metadata,
  non_hyperbolic,
  degenerate_grid,
  evaluation,
  config,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::boundary_input: return "boundary-input";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::scale_overflow: return "scale-overflow";
    case ErrorKind::not_tending_to_infinity: return "not-tending-to-infinity";
    case ErrorKind::orbit_too_short: return "orbit-too-short";
    case ErrorKind::non_restricted: return "non-restricted";
    case ErrorKind::missing_metadata: return "missing-metadata";
    case ErrorKind::non_hyperbolic: return "non-hyperbolic";
    case ErrorKind::degenerate_grid: return "degenerate-grid";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace valiron
