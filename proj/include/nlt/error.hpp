#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlt {

enum class ErrorKind {
  precondition,
  malformed_spec,
  divergent_moment,
  under_resolved,
  truncation,
  unsupported_kernel,
  inadmissible_kernel,
  numeric,
  shape,
  invariant_region,
  cfl,
  padding,
  unresolved_band,
  incomplete_report,
  parse,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::malformed_spec: return "malformed-spec";
    case ErrorKind::divergent_moment: return "divergent-moment";
    case ErrorKind::under_resolved: return "under-resolved";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::unsupported_kernel: return "unsupported-kernel";
    case ErrorKind::inadmissible_kernel: return "inadmissible-kernel";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::shape: return "shape";
    case ErrorKind::invariant_region: return "invariant-region";
    case ErrorKind::cfl: return "cfl";
    case ErrorKind::padding: return "padding";
    case ErrorKind::unresolved_band: return "unresolved-band";
    case ErrorKind::incomplete_report: return "incomplete-report";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` tells callers which
/// contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlt
