#include "decoy/feasibility.hpp"

#include <cmath>

#include "decoy/errors.hpp"

namespace decoy {

void WeakDecoySetup::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("weak decoy: eta must lie in (0, 1)");
    if (!(s0 >= 0.0 && s0 < 1.0)) throw ParameterError("weak decoy: s0 must lie in [0, 1)");
    if (!(mu_v > 0.0 && mu_v <= eta)) throw ParameterError("weak decoy: requires 0 < mu_v <= eta");
    if (!(rep_rate > 0.0)) throw ParameterError("weak decoy: repetition rate must be positive");
    if (!(confidence_exponent > 0.0)) throw ParameterError("weak decoy: confidence exponent must be positive");
}

double weak_decoy_s1_bound(const WeakDecoySetup& setup) {
    setup.validate();
    const double mv = setup.mu_v;
    return (setup.eta * mv - mv * mv / 2.0) / (mv * std::exp(-mv));
}

double required_pulses(const WeakDecoySetup& setup, double rel_dark_fluct_target) {
    setup.validate();
    if (!(rel_dark_fluct_target > 0.0 && rel_dark_fluct_target <= 1.0)) {
        throw DomainError("required_pulses: target must lie in (0, 1]");
    }
    if (!(setup.s0 > 0.0)) throw DomainError("required_pulses: dark count rate must be positive");
    const double exact = 4.0 * setup.confidence_exponent / (setup.s0 * rel_dark_fluct_target * rel_dark_fluct_target);
    const double nearest = std::round(exact);
    if (std::abs(exact - nearest) <= 1e-12 * exact) return nearest;
    return std::ceil(exact);
}

double acquisition_time(double n_pulses, double rep_rate) {
    if (!(rep_rate > 0.0)) throw DomainError("acquisition_time: repetition rate must be positive");
    if (!(n_pulses >= 0.0)) throw DomainError("acquisition_time: pulse count must be non-negative");
    return n_pulses / rep_rate;
}

FeasibilityReport feasibility_report(const WeakDecoySetup& setup, double rel_dark_fluct_target) {
    FeasibilityReport r;
    r.setup = setup;
    r.target = rel_dark_fluct_target;
    r.s1_lower = weak_decoy_s1_bound(setup);
    r.signal_clicks_per_pulse = -std::expm1(-setup.eta * setup.mu_v);
    r.dark_clicks_per_pulse = setup.s0;
    r.required_pulses = required_pulses(setup, rel_dark_fluct_target);
    r.seconds = acquisition_time(r.required_pulses, setup.rep_rate);
    r.days = r.seconds / kSecondsPerDay;
    r.practical = r.days <= 1.0;
    return r;
}

}  // namespace decoy
