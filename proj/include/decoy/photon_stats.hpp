#pragma once

#include <optional>
#include <string_view>

namespace decoy {

// Tolerances shared across modules.
inline constexpr double kSumTolerance = 1e-12;
inline constexpr double kDecompositionTolerance = 1e-12;

/// Probability that a dephased coherent state of mean photon number `mu`
/// contains exactly `n` photons. Uses the product recurrence for moderate
/// arguments and log-space evaluation otherwise.
double poisson_pmf(long n, double mu);

/// Sum of P_n(mu) for n >= 2, evaluated without cancellation for small mu.
double multi_photon_probability(double mu);

enum class PairViolation {
    none,
    non_positive_intensity,   // mu <= 0 or mu' <= 0
    not_increasing,           // mu' <= mu
    single_photon_order,      // mu' e^{-mu'} <= mu e^{-mu}
};

std::string_view describe(PairViolation v);

struct PairVerdict {
    PairViolation violation = PairViolation::none;
    double lhs = 0.0;  // mu' e^{-mu'}
    double rhs = 0.0;  // mu e^{-mu}

    bool valid() const { return violation == PairViolation::none; }
    explicit operator bool() const { return valid(); }
};

/// Checks mu' > mu and mu' e^{-mu'} > mu e^{-mu}. Never throws.
PairVerdict validate_pair(double mu, double mu_prime);

/// Signal and second-signal intensities. Always admissible once constructed.
class ProtocolParams {
public:
    /// Throws ParameterError naming the failed clause.
    ProtocolParams(double mu, double mu_prime);

    static std::optional<ProtocolParams> try_make(double mu, double mu_prime);

    double mu() const { return mu_; }
    double mu_prime() const { return mu_prime_; }

    friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;

private:
    double mu_;
    double mu_prime_;
};

/// Weights of the convex forms
///   rho_mu  = e^{-mu}|0><0| + mu e^{-mu}|1><1| + c rho_c
///   rho_mu' = e^{-mu'}|0><0| + mu' e^{-mu'}|1><1| + c*multi_ratio rho_c + d rho_d
struct DecompositionCoefficients {
    double c = 0.0;
    double d = 0.0;
    double multi_ratio = 0.0;  // mu'^2 e^{-mu'} / (mu^2 e^{-mu})
};

/// Throws DecompositionError if d < -kDecompositionTolerance.
DecompositionCoefficients decompose(const ProtocolParams& params);

}  // namespace decoy
