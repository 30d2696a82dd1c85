#pragma once

#include <string_view>

#include "decoy/photon_stats.hpp"

namespace decoy {

/// Counting rates (yields) observed per class: vacuum Y_0, signal Y_mu and
/// second signal Y_mu'. Each is a click probability per pulse sent.
struct ObservedRates {
    double s0 = 0.0;
    double s_mu = 0.0;
    double s_mu_prime = 0.0;

    /// Throws ParameterError unless every rate lies in [0, 1].
    static ObservedRates make(double s0, double s_mu, double s_mu_prime);

    friend bool operator==(const ObservedRates&, const ObservedRates&) = default;
};

enum class BoundMethod { hwang_crude, hwang_optimized, wang_asymptotic, wang_finite };

std::string_view to_string(BoundMethod m);

struct BoundReport {
    double delta_upper = 1.0;        // tagged fraction in Y_mu, in [0, 1]
    double delta_prime_upper = 1.0;  // tagged fraction in Y_mu', in [0, 1]
    double s1_lower = 0.0;
    double sc_upper = 0.0;
    BoundMethod method = BoundMethod::wang_asymptotic;
    bool clamped = false;
    bool vacuous = false;
    bool degenerate = false;  // S_mu' == 0
    int iterations = 0;       // solver iterations, 0 for closed forms
};

/// A value forced into [lo, hi]; `clamped` records whether the clamp fired.
struct Clamped {
    double value = 0.0;
    bool clamped = false;
};

Clamped clamp_unit(double raw);

// Solver defaults.
inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr int kDefaultMaxIterations = 10000;

/// Hwang's bound: Delta <= mu^2 e^{-mu} S_mu' / (mu'^2 e^{-mu'} S_mu).
BoundReport hwang_bound(const ObservedRates& rates, const ProtocolParams& params);

/// Hwang's bound at its best second intensity (mu' = 1) for a no-Eve
/// channel: mu e^{1-mu}. Throws DomainError unless 0 < mu < 1.
double hwang_optimized(double mu);

/// Closed-form asymptotic bound obtained by solving the s_c / s_1
/// constraints simultaneously.
BoundReport wang_asymptotic_bound(const ObservedRates& rates, const ProtocolParams& params);

/// Unclamped value of the asymptotic closed form.
double wang_asymptotic_raw(const ObservedRates& rates, const ProtocolParams& params);

struct IterationResult {
    double sc_upper = 0.0;
    double s1_lower = 0.0;
    int iterations = 0;
    bool vacuous = false;  // s_1 went negative; sc left at the crude value
};

/// Alternates s_1 (from the exact Y_mu identity) and s_c (from the Y_mu'
/// inequality), starting at the crude bound with s_1 = 0. The s_c sequence
/// is monotone decreasing with contraction factor mu/mu'.
/// Throws ConvergenceError after `max_iter` updates.
IterationResult iterate_sc_s1(const ObservedRates& rates, const ProtocolParams& params,
                              double tol = kDefaultTolerance, int max_iter = kDefaultMaxIterations);

/// Upper bound on the tagged fraction of Y_mu' given an upper bound `delta`
/// for Y_mu, via the single-photon lower bound implied by `delta`.
Clamped delta_prime_bound(double delta, const ObservedRates& rates, const ProtocolParams& params);

}  // namespace decoy
