#include "basinstab/ode.h"

namespace basinstab {

std::string to_string(IntegrationMethod m) {
    return m == IntegrationMethod::FixedRk4 ? "fixed-rk4" : "adaptive-rk45";
}

IntegrationMethod integration_method_from_string(const std::string& s) {
    if (s == "fixed-rk4") return IntegrationMethod::FixedRk4;
    if (s == "adaptive-rk45") return IntegrationMethod::AdaptiveRk45;
    throw std::invalid_argument("unknown integration method '" + s + "' (expected fixed-rk4|adaptive-rk45)");
}

void IntegratorSettings::validate() const {
    if (!(fixed_step > 0.0)) throw std::invalid_argument("integrator.fixed_step must be > 0");
    if (!(abs_tol > 0.0)) throw std::invalid_argument("integrator.abs_tol must be > 0");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("integrator.rel_tol must be > 0");
    if (!(min_step > 0.0)) throw std::invalid_argument("integrator.min_step must be > 0");
    if (!(min_step < max_step)) throw std::invalid_argument("integrator.min_step must be < integrator.max_step");
    if (!(event_refinement_tol > 0.0)) throw std::invalid_argument("integrator.event_refinement_tol must be > 0");
    if (!(bailout > 0.0)) throw std::invalid_argument("integrator.bailout must be > 0");
}

}  // namespace basinstab
