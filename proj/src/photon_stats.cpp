#include "decoy/photon_stats.hpp"

#include <cmath>
#include <string>

#include "decoy/errors.hpp"

namespace decoy {

namespace {

// Beyond these the recurrence either underflows at the seed e^{-mu} or
// accumulates more rounding than the log-space form.
constexpr double kRecurrenceMaxMu = 600.0;
constexpr long kRecurrenceMaxN = 400;

}  // namespace

double poisson_pmf(long n, double mu) {
    if (n < 0) throw DomainError("poisson_pmf: negative photon number");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("poisson_pmf: mean photon number must be finite and >= 0");
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;

    if (mu <= kRecurrenceMaxMu && n <= kRecurrenceMaxN) {
        double p = std::exp(-mu);
        for (long k = 1; k <= n; ++k) p *= mu / static_cast<double>(k);
        return p;
    }
    const double nd = static_cast<double>(n);
    return std::exp(nd * std::log(mu) - mu - std::lgamma(nd + 1.0));
}

double multi_photon_probability(double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("multi_photon_probability: invalid mean photon number");
    if (mu > 1.0) return -std::expm1(-mu) - mu * std::exp(-mu);
    // e^{-mu} * sum_{n>=2} mu^n/n!; terms shrink by at least mu/3 after n=2.
    double term = mu * mu / 2.0;
    double sum = 0.0;
    for (int n = 2; n < 200 && term > 1e-20 * sum; ++n) {
        sum += term;
        term *= mu / (n + 1);
    }
    return std::exp(-mu) * sum;
}

std::string_view describe(PairViolation v) {
    switch (v) {
        case PairViolation::none: return "valid";
        case PairViolation::non_positive_intensity: return "intensities must be positive";
        case PairViolation::not_increasing: return "requires mu' > mu";
        case PairViolation::single_photon_order: return "requires mu' e^{-mu'} > mu e^{-mu}";
    }
    return "unknown";
}

PairVerdict validate_pair(double mu, double mu_prime) {
    PairVerdict verdict;
    if (!(mu > 0.0) || !(mu_prime > 0.0) || !std::isfinite(mu) || !std::isfinite(mu_prime)) {
        verdict.violation = PairViolation::non_positive_intensity;
        return verdict;
    }
    verdict.lhs = mu_prime * std::exp(-mu_prime);
    verdict.rhs = mu * std::exp(-mu);
    if (!(mu_prime > mu)) {
        verdict.violation = PairViolation::not_increasing;
    } else if (!(verdict.lhs > verdict.rhs)) {
        verdict.violation = PairViolation::single_photon_order;
    }
    return verdict;
}

ProtocolParams::ProtocolParams(double mu, double mu_prime) : mu_(mu), mu_prime_(mu_prime) {
    const PairVerdict verdict = validate_pair(mu, mu_prime);
    if (!verdict) {
        throw ParameterError("invalid intensity pair (mu=" + std::to_string(mu) + ", mu'=" +
                             std::to_string(mu_prime) + "): " + std::string(describe(verdict.violation)));
    }
}

std::optional<ProtocolParams> ProtocolParams::try_make(double mu, double mu_prime) {
    if (!validate_pair(mu, mu_prime)) return std::nullopt;
    return ProtocolParams(mu, mu_prime);
}

DecompositionCoefficients decompose(const ProtocolParams& params) {
    const double mu = params.mu();
    const double mp = params.mu_prime();

    DecompositionCoefficients out;
    out.c = multi_photon_probability(mu);
    const double ratio_mu = mu / mp;
    const double log_ratio = std::log(ratio_mu);
    out.multi_ratio = std::exp(mu - mp) / (ratio_mu * ratio_mu);

    // d = sum_{n>=3} P_n(mu') (1 - (mu/mu')^{n-2}); the n = 2 terms cancel
    // exactly, every remaining term is non-negative.
    double d = 0.0;
    double pn = poisson_pmf(2, mp);
    for (int n = 3; n < 400; ++n) {
        pn *= mp / n;
        const double term = pn * -std::expm1((n - 2) * log_ratio);
        d += term;
        if (pn < 1e-30 && n > mp + 10) break;
    }
    out.d = d;
    if (out.d < -kDecompositionTolerance) throw DecompositionError("negative weight d in the mu' decomposition");
    if (!(out.c > 0.0)) throw DecompositionError("multi-photon weight c must be positive");
    return out;
}

}  // namespace decoy
