#pragma once

namespace decoy {

/// Vacuum + very weak decoy setup, where the weak decoy intensity must stay
/// below the transmittance for its single-photon bound to mean anything.
struct WeakDecoySetup {
    double eta = 1e-4;
    double s0 = 1e-6;
    double mu_v = 1e-4;
    double rep_rate = 8e7;  // pulses per second
    double confidence_exponent = 25.0;

    /// Throws ParameterError unless 0 < eta < 1, 0 <= s0 < 1,
    /// 0 < mu_v <= eta and rep_rate > 0.
    void validate() const;
};

/// Single-photon yield certified by the weak decoy when every multi-photon
/// pulse is assumed to click and dark counts are known exactly:
/// (eta mu_v - mu_v^2 / 2) / (mu_v e^{-mu_v}).
double weak_decoy_s1_bound(const WeakDecoySetup& setup);

/// Smallest N with sqrt(4E / (s0 N)) <= target, i.e. N >= 4E / (s0 target^2).
/// Values within 1e-12 relative of an integer are taken as that integer.
double required_pulses(const WeakDecoySetup& setup, double rel_dark_fluct_target);

inline constexpr double kSecondsPerDay = 86400.0;

/// Seconds needed to emit `n_pulses` at `rep_rate` pulses per second.
double acquisition_time(double n_pulses, double rep_rate);

struct FeasibilityReport {
    WeakDecoySetup setup;
    double target = 1e-3;
    double s1_lower = 0.0;
    double signal_clicks_per_pulse = 0.0;  // 1 - e^{-eta mu_v}
    double dark_clicks_per_pulse = 0.0;    // s0
    double required_pulses = 0.0;
    double seconds = 0.0;
    double days = 0.0;
    bool practical = false;  // at most one day of acquisition
};

FeasibilityReport feasibility_report(const WeakDecoySetup& setup, double rel_dark_fluct_target);

}  // namespace decoy
