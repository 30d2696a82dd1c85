#include "decoy/finite_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "decoy/errors.hpp"

namespace decoy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool whole(double x) { return std::isfinite(x) && std::floor(x) == x; }

double s1_from_identity(const ObservedRates& rates, const ProtocolParams& p, double c, double sc) {
    return (rates.s_mu - std::exp(-p.mu()) * rates.s0 - c * sc) / (p.mu() * std::exp(-p.mu()));
}

BoundReport vacuous_report(const ObservedRates& rates, double c, int iterations) {
    BoundReport r;
    r.method = BoundMethod::wang_finite;
    r.delta_upper = 1.0;
    r.delta_prime_upper = 1.0;
    r.s1_lower = 0.0;
    r.sc_upper = rates.s_mu / c;
    r.clamped = true;
    r.vacuous = true;
    r.degenerate = rates.s_mu_prime == 0.0;
    r.iterations = iterations;
    return r;
}

}  // namespace

PulseBudget PulseBudget::make(double n_mu, double n_mu_prime, double n_vacuum) {
    if (!whole(n_mu) || !whole(n_mu_prime) || !whole(n_vacuum)) {
        throw ParameterError("pulse counts must be finite whole numbers");
    }
    if (n_mu < 1.0 || n_mu_prime < 1.0) throw ParameterError("signal classes need at least one pulse");
    if (n_vacuum < 0.0) throw ParameterError("vacuum pulse count must be non-negative");
    return PulseBudget{n_mu, n_mu_prime, n_vacuum};
}

void FluctuationSettings::validate() const {
    if (!(confidence_exponent > 0.0) || !std::isfinite(confidence_exponent)) {
        throw ParameterError("confidence exponent must be positive");
    }
    if (!(r0 >= 0.0 && r0 < 1.0)) throw ParameterError("r0 must lie in [0, 1)");
}

double confidence_bound(double delta_abs, double s, double n0) {
    if (!(s > 0.0)) throw DomainError("confidence_bound: counting rate must be positive");
    if (!(delta_abs >= 0.0)) throw DomainError("confidence_bound: deviation must be non-negative");
    if (!(n0 >= 1.0)) throw DomainError("confidence_bound: sub-population must be >= 1");
    return std::exp(-delta_abs * delta_abs * n0 / (4.0 * s));
}

double relative_fluctuation(double s, double n0, const FluctuationSettings& settings) {
    if (!(s * n0 > 0.0)) throw DomainError("relative_fluctuation: s * n0 must be positive");
    return std::sqrt(4.0 * settings.confidence_exponent / (s * n0));
}

double solve_sc_fixed(const ObservedRates& rates, const ProtocolParams& params, const Fluctuations& r) {
    const double mu = params.mu();
    const double mp = params.mu_prime();
    const double c = decompose(params).c;
    const double k = (mu / mp) * (mu / mp) * std::exp(mp - mu);
    const double q = mu / mp;

    const double coefficient = c * ((1.0 - r.rc) - q * (1.0 - r.r1));
    if (!(coefficient > 0.0)) return kInf;
    const double rhs = k * (rates.s_mu_prime - std::exp(-mp) * (1.0 + r.r0) * rates.s0) -
                       q * (1.0 - r.r1) * (rates.s_mu - std::exp(-mu) * rates.s0);
    return rhs / coefficient;
}

double delta_from_inequality(const ObservedRates& rates, const ProtocolParams& params, const Fluctuations& r,
                             double s1) {
    if (!(rates.s_mu > 0.0)) throw DomainError("delta_from_inequality: S_mu must be positive");
    const double mu = params.mu();
    const double mp = params.mu_prime();
    const double coefficient = mp * std::exp(mu) * ((1.0 - r.rc) * mp / mu - 1.0);
    if (!(coefficient > 0.0)) return kInf;
    const double rhs = mu * std::exp(mp) * rates.s_mu_prime / rates.s_mu - mp * std::exp(mu) +
                       ((mp - mu) * rates.s0 + mu * mp * r.r1 * s1 - mu * r.r0 * rates.s0) / rates.s_mu;
    return rhs / coefficient;
}

Fluctuations fluctuations_at(double s1, double sc, const ProtocolParams& params, const PulseBudget& budget,
                             const FluctuationSettings& settings) {
    const double mu = params.mu();
    const double mp = params.mu_prime();
    const DecompositionCoefficients coeffs = decompose(params);

    double n_single = budget.n_mu * mu * std::exp(-mu);
    double n_multi = budget.n_mu * coeffs.c;
    if (settings.subpopulation == SubPopulation::min_over_classes) {
        n_single = std::min(n_single, budget.n_mu_prime * mp * std::exp(-mp));
        n_multi = std::min(n_multi, budget.n_mu_prime * coeffs.c * coeffs.multi_ratio);
    }
    Fluctuations r;
    r.r1 = s1 > 0.0 ? relative_fluctuation(s1, n_single, settings) : kInf;
    r.rc = sc > 0.0 ? relative_fluctuation(sc, n_multi, settings) : kInf;
    r.r0 = settings.r0;
    return r;
}

BoundReport finite_bound(const ObservedRates& rates, const ProtocolParams& params, const PulseBudget& budget,
                         const FluctuationSettings& settings, double tol, int max_iter) {
    if (!(rates.s_mu > 0.0)) throw DomainError("finite_bound: S_mu must be positive");
    if (!(tol > 0.0) || tol > 1e-6) throw DomainError("finite_bound: tol must lie in (0, 1e-6]");
    if (max_iter < 1) throw DomainError("finite_bound: max_iter must be >= 1");
    settings.validate();

    const double c = decompose(params).c;
    const double asymptotic = wang_asymptotic_raw(rates, params);
    if (!(asymptotic < 1.0)) return vacuous_report(rates, c, 0);

    // A non-positive asymptotic seed leaves r_c undefined; start from the
    // crude bound instead and let the iteration descend.
    double sc = asymptotic * rates.s_mu / c;
    if (!(sc > 0.0)) {
        const double mu = params.mu();
        const double mp = params.mu_prime();
        const double k = (mu / mp) * (mu / mp) * std::exp(mp - mu);
        sc = k * (rates.s_mu_prime - std::exp(-mp) * rates.s0) / c;
    }
    double s1 = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        s1 = s1_from_identity(rates, params, c, sc);
        if (!(s1 > 0.0) || !(sc > 0.0)) return vacuous_report(rates, c, it);
        const Fluctuations r = fluctuations_at(s1, sc, params, budget, settings);
        if (r.r1 >= 1.0 || r.rc >= 1.0) return vacuous_report(rates, c, it);

        const double next = solve_sc_fixed(rates, params, r);
        if (!std::isfinite(next) || !(c * next < rates.s_mu)) return vacuous_report(rates, c, it);

        const bool done = std::abs(next - sc) <= tol * sc;
        sc = next;
        if (done) {
            BoundReport report;
            report.method = BoundMethod::wang_finite;
            report.iterations = it;
            const Clamped delta = clamp_unit(c * sc / rates.s_mu);
            report.delta_upper = delta.value;
            report.sc_upper = delta.value * rates.s_mu / c;
            report.s1_lower = std::max(0.0, s1_from_identity(rates, params, c, report.sc_upper));
            const Clamped dprime = delta_prime_bound(delta.value, rates, params);
            report.delta_prime_upper = dprime.value;
            report.clamped = delta.clamped || dprime.clamped;
            report.vacuous = delta.value >= 1.0;
            report.degenerate = rates.s_mu_prime == 0.0;
            return report;
        }
    }
    throw ConvergenceError("finite_bound: no convergence within max_iter", sc, s1, max_iter);
}

}  // namespace decoy
