#include "hexweb/ode.hpp"

namespace hexweb {

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) || !(cfg.max_step > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "integrator tolerances and max_step must be positive");
  }
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::domain_exit: return "domain_exit";
    case Termination::step_failure: return "step_failure";
  }
  return "completed";
}

}  // namespace hexweb
