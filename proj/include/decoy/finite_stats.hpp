#pragma once

#include "decoy/bound_engine.hpp"

namespace decoy {

/// Pulses sent per class. Stored as doubles so that asymptotic budgets
/// (1e30) are representable; values must be whole numbers.
struct PulseBudget {
    double n_mu = 0.0;
    double n_mu_prime = 0.0;
    double n_vacuum = 0.0;

    /// Throws ParameterError unless n_mu, n_mu_prime >= 1, n_vacuum >= 0,
    /// all finite and integral.
    static PulseBudget make(double n_mu, double n_mu_prime, double n_vacuum);
};

enum class SubPopulation {
    signal_class,      // N_mu * weight, the default
    min_over_classes,  // min over Y_mu and Y_mu' of N * weight
};

struct FluctuationSettings {
    double confidence_exponent = 25.0;  // violation probability <= e^{-E}
    /// Relative fluctuation of the vacuum yield in Y_mu'. 0 means "zero" mode.
    double r0 = 0.0;
    SubPopulation subpopulation = SubPopulation::signal_class;

    void validate() const;
};

/// exp(-delta^2 n0 / (4 s)): probability that two random halves of a
/// population with counting rate `s` differ by more than `delta_abs`.
double confidence_bound(double delta_abs, double s, double n0);

/// sqrt(4E / (s n0)); with E = 25 this is 10 / sqrt(s n0).
double relative_fluctuation(double s, double n0, const FluctuationSettings& settings = {});

/// Fluctuation levels applied to the Y_mu' constraint.
struct Fluctuations {
    double r1 = 0.0;  // single-photon yield, s1' = (1 - r1) s1
    double rc = 0.0;  // rho_c yield, sc' = (1 - rc) sc
    double r0 = 0.0;  // vacuum yield, s0' = (1 + r0) s0
};

/// Largest s_c satisfying the Y_mu identity and the fluctuation-weakened
/// Y_mu' constraint for fixed fluctuation levels. Returns +inf when the
/// constraint no longer bounds s_c.
double solve_sc_fixed(const ObservedRates& rates, const ProtocolParams& params, const Fluctuations& r);

/// Same bound expressed directly as Delta, by rearranging the coupled
/// system into a single inequality in Delta with s_1 held at `s1`.
/// Returns +inf when the coefficient of Delta is not positive.
double delta_from_inequality(const ObservedRates& rates, const ProtocolParams& params, const Fluctuations& r,
                             double s1);

/// Fluctuation levels implied by a candidate (s_1, s_c).
Fluctuations fluctuations_at(double s1, double sc, const ProtocolParams& params, const PulseBudget& budget,
                             const FluctuationSettings& settings);

/// Non-asymptotic bound: solves the coupled system self-consistently, with
/// r_1 and r_c tied to the current iterates. Seeds from the asymptotic
/// solution. Returns a vacuous report when any fluctuation reaches 1.
BoundReport finite_bound(const ObservedRates& rates, const ProtocolParams& params, const PulseBudget& budget,
                         const FluctuationSettings& settings = {}, double tol = kDefaultTolerance,
                         int max_iter = kDefaultMaxIterations);

}  // namespace decoy
