#include "aoi_recruit/error.hpp"

namespace aoi_recruit {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_instance: return "invalid instance";
    case Errc::invalid_action: return "invalid action";
    case Errc::domain: return "domain error";
    case Errc::parameter: return "parameter error";
    case Errc::arity: return "arity error";
    case Errc::unbounded_threshold: return "unbounded threshold";
    case Errc::cap_exceeded: return "iteration cap exceeded";
    case Errc::adaptation_failure: return "truncation adaptation failed";
    case Errc::structural_violation: return "structural violation";
    case Errc::divergent_chain: return "divergent chain";
    case Errc::oracle_too_large: return "oracle too large";
    case Errc::equivalence_failure: return "solver equivalence failure";
  }
  return "error";
}

}  // namespace aoi_recruit
