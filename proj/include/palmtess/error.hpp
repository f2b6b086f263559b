#pragma once

#include <stdexcept>
#include <string>

namespace palmtess {

enum class Errc {
  unsupported_dimension,
  invalid_configuration,
  unbounded_cell,
  invalid_input,
  invalid_spec,
  rejected_spec,
  unsupported_process,
  invalid_law,
  boundary_contamination,
  invalid_combination,
  invalid_parameter,
  locality_violation,
  unsupported_law,
  config_error,
  schema_error,
  io_error,
};

inline const char* to_string(Errc code) noexcept;

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::unsupported_dimension: return "unsupported-dimension";
    case Errc::invalid_configuration: return "invalid-configuration";
    case Errc::unbounded_cell: return "unbounded-cell";
    case Errc::invalid_input: return "invalid-input";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::rejected_spec: return "rejected-spec";
    case Errc::unsupported_process: return "unsupported-process";
    case Errc::invalid_law: return "invalid-law";
    case Errc::boundary_contamination: return "boundary-contamination";
    case Errc::invalid_combination: return "invalid-combination";
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::locality_violation: return "locality-violation";
    case Errc::unsupported_law: return "unsupported-law";
    case Errc::config_error: return "config-error";
    case Errc::schema_error: return "schema-error";
    case Errc::io_error: return "io-error";
  }
  return "error";
}

}  // namespace palmtess
