#pragma once

#include <stdexcept>
#include <string>

namespace aoi_recruit {

enum class Errc {
  invalid_instance,
  invalid_action,
  domain,
  parameter,
  arity,
  unbounded_threshold,
  cap_exceeded,
  adaptation_failure,
  structural_violation,
  divergent_chain,
  oracle_too_large,
  equivalence_failure,
};

const char* errc_name(Errc code) noexcept;

// Validation errors are caller mistakes (bad input); everything else is a
// failure of a solver, oracle or evaluation run.
inline bool is_validation(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_instance:
    case Errc::invalid_action:
    case Errc::domain:
    case Errc::parameter:
    case Errc::arity:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace aoi_recruit
