#pragma once

#include <stdexcept>
#include <string>

namespace petc {

// invalid user-supplied data (dimensions, ranges, parse problems) -> std::invalid_argument

// a mathematically well-posed request whose result violates a design requirement
// (closed loop not Hurwitz, Lyapunov candidate not PD, ...)
struct design_error : std::runtime_error {
  explicit design_error(const std::string& what) : std::runtime_error(what) {}
};

// a numerical procedure failed to converge or lost too much accuracy
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// the computed abstraction is internally inconsistent (e.g. a region with no
// outgoing trigger edge); always a bug upstream, never user error
struct abstraction_error : std::runtime_error {
  explicit abstraction_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace petc
