#include "decoy/bound_engine.hpp"

#include <algorithm>
#include <cmath>

#include "decoy/errors.hpp"

namespace decoy {

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

void require_signal_counts(const ObservedRates& rates) {
    if (!(rates.s_mu > 0.0)) throw DomainError("bound requires a positive counting rate S_mu");
}

// mu^2 e^{-mu} / (mu'^2 e^{-mu'}), the inverse of the rho_c weight ratio.
double crude_factor(const ProtocolParams& p) {
    const double r = p.mu() / p.mu_prime();
    return r * r * std::exp(p.mu_prime() - p.mu());
}

double s1_from_identity(const ObservedRates& rates, const ProtocolParams& p, double c, double sc) {
    return (rates.s_mu - std::exp(-p.mu()) * rates.s0 - c * sc) / (p.mu() * std::exp(-p.mu()));
}

void finish_report(BoundReport& report, Clamped delta, const ObservedRates& rates, const ProtocolParams& params,
                   double c) {
    report.delta_upper = delta.value;
    report.sc_upper = delta.value * rates.s_mu / c;
    const Clamped dprime = delta_prime_bound(delta.value, rates, params);
    report.delta_prime_upper = dprime.value;
    report.clamped = report.clamped || delta.clamped || dprime.clamped;
    report.vacuous = delta.value >= 1.0;
    report.degenerate = rates.s_mu_prime == 0.0;
}

}  // namespace

ObservedRates ObservedRates::make(double s0, double s_mu, double s_mu_prime) {
    if (!in_unit(s0) || !in_unit(s_mu) || !in_unit(s_mu_prime)) {
        throw ParameterError("counting rates must lie in [0, 1]");
    }
    return ObservedRates{s0, s_mu, s_mu_prime};
}

std::string_view to_string(BoundMethod m) {
    switch (m) {
        case BoundMethod::hwang_crude: return "hwang_crude";
        case BoundMethod::hwang_optimized: return "hwang_optimized";
        case BoundMethod::wang_asymptotic: return "wang_asymptotic";
        case BoundMethod::wang_finite: return "wang_finite";
    }
    return "unknown";
}

Clamped clamp_unit(double raw) {
    if (std::isnan(raw)) return {1.0, true};
    if (raw > 1.0) return {1.0, true};
    if (raw < 0.0) return {0.0, true};
    return {raw, false};
}

BoundReport hwang_bound(const ObservedRates& rates, const ProtocolParams& params) {
    require_signal_counts(rates);
    const double c = decompose(params).c;
    BoundReport report;
    report.method = BoundMethod::hwang_crude;
    finish_report(report, clamp_unit(crude_factor(params) * rates.s_mu_prime / rates.s_mu), rates, params, c);
    report.s1_lower = 0.0;
    return report;
}

double hwang_optimized(double mu) {
    if (!(mu > 0.0) || !(mu < 1.0)) throw DomainError("hwang_optimized: requires 0 < mu < 1");
    return std::min(1.0, mu * std::exp(1.0 - mu));
}

double wang_asymptotic_raw(const ObservedRates& rates, const ProtocolParams& params) {
    require_signal_counts(rates);
    const double mu = params.mu();
    const double mp = params.mu_prime();
    const double ratio = (mu * std::exp(-mu) * rates.s_mu_prime) / (mp * std::exp(-mp) * rates.s_mu);
    return mu / (mp - mu) * (ratio - 1.0) + mu * std::exp(-mu) * rates.s0 / (mp * rates.s_mu);
}

BoundReport wang_asymptotic_bound(const ObservedRates& rates, const ProtocolParams& params) {
    const double raw = wang_asymptotic_raw(rates, params);
    const double c = decompose(params).c;
    BoundReport report;
    report.method = BoundMethod::wang_asymptotic;
    finish_report(report, clamp_unit(raw), rates, params, c);
    report.s1_lower = std::max(0.0, s1_from_identity(rates, params, c, report.sc_upper));
    return report;
}

IterationResult iterate_sc_s1(const ObservedRates& rates, const ProtocolParams& params, double tol, int max_iter) {
    require_signal_counts(rates);
    if (!(tol > 0.0) || tol > 1e-6) throw DomainError("iterate_sc_s1: tol must lie in (0, 1e-6]");
    if (max_iter < 1) throw DomainError("iterate_sc_s1: max_iter must be >= 1");

    const double mp = params.mu_prime();
    const double c = decompose(params).c;
    const double k = crude_factor(params);
    const double single_weight_prime = mp * std::exp(-mp);
    const double vacuum_weight_prime = std::exp(-mp);

    const double crude = k * (rates.s_mu_prime - vacuum_weight_prime * rates.s0) / c;
    double sc = crude;
    double s1 = 0.0;

    for (int it = 1; it <= max_iter; ++it) {
        s1 = s1_from_identity(rates, params, c, sc);
        if (s1 < 0.0) {
            return IterationResult{std::max(0.0, crude), 0.0, it, true};
        }
        const double next = k * (rates.s_mu_prime - vacuum_weight_prime * rates.s0 - single_weight_prime * s1) / c;
        const bool done = std::abs(next - sc) <= tol * std::abs(sc);
        sc = next;
        if (done) {
            IterationResult out{sc, s1, it, false};
            if (out.sc_upper < 0.0) {
                out.sc_upper = 0.0;
                out.s1_lower = std::max(0.0, s1_from_identity(rates, params, c, 0.0));
            }
            return out;
        }
    }
    throw ConvergenceError("iterate_sc_s1: no convergence within max_iter", sc, s1, max_iter);
}

Clamped delta_prime_bound(double delta, const ObservedRates& rates, const ProtocolParams& params) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("delta_prime_bound: delta must lie in [0, 1]");
    require_signal_counts(rates);
    if (rates.s_mu_prime == 0.0) return {0.0, false};

    const double mu = params.mu();
    const double mp = params.mu_prime();
    // Single-photon counts in Y_mu' are at least (mu' e^{-mu'} / mu e^{-mu}) times
    // the single-photon counts certified in Y_mu.
    const double single_share_mu = 1.0 - delta - std::exp(-mu) * rates.s0 / rates.s_mu;
    const double transfer = (mp * rates.s_mu) / (mu * rates.s_mu_prime) * std::exp(mu - mp);
    const double raw = 1.0 - single_share_mu * transfer - std::exp(-mp) * rates.s0 / rates.s_mu_prime;
    return clamp_unit(raw);
}

}  // namespace decoy
