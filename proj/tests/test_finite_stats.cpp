#include <cmath>
#include <limits>
#include <random>

#include "decoy/channel_sim.hpp"
#include "decoy/errors.hpp"
#include "decoy/finite_stats.hpp"
#include "decoy/table1.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace decoy;

namespace {

ObservedRates table_rates(double mu, double mp, double eta, double s0 = 1e-6) {
    return expected_rates(table1::scenario(eta, s0), ProtocolParams(mu, mp));
}

ObservedRates physical_rates(double mu, double mp, double eta, double s0 = 1e-6) {
    return expected_rates(NoEve{eta, s0, true}, ProtocolParams(mu, mp));
}

}  // namespace

TEST_CASE("PulseBudget validation") {
    CHECK_NOTHROW(PulseBudget::make(1e10, 1e10, 0));
    CHECK_THROWS_AS(PulseBudget::make(0, 1, 0), ParameterError);
    CHECK_THROWS_AS(PulseBudget::make(1.5, 1, 0), ParameterError);
    CHECK_THROWS_AS(PulseBudget::make(1, 1, -1), ParameterError);
    CHECK_THROWS_AS(PulseBudget::make(std::numeric_limits<double>::infinity(), 1, 0), ParameterError);
}

TEST_CASE("FluctuationSettings validation") {
    CHECK_NOTHROW(FluctuationSettings{}.validate());
    CHECK_THROWS_AS((FluctuationSettings{0.0, 0.0, SubPopulation::signal_class}.validate()), ParameterError);
    CHECK_THROWS_AS((FluctuationSettings{25.0, 1.0, SubPopulation::signal_class}.validate()), ParameterError);
}

TEST_CASE("confidence_bound examples") {
    CHECK(confidence_bound(0.0, 1e-4, 1e10) == 1.0);
    // delta^2 n0 / s = 100
    CHECK(confidence_bound(1e-3, 1e-4, 1e4) == doctest::Approx(std::exp(-25.0)).epsilon(1e-12));
    CHECK(confidence_bound(2e-6, 1e-4, 1e10) == doctest::Approx(std::exp(-100.0)).epsilon(1e-12));
    CHECK_THROWS_AS(confidence_bound(1e-3, 0.0, 1e4), DomainError);
}

TEST_CASE("relative_fluctuation examples") {
    CHECK(relative_fluctuation(1e-4, 1e10) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(relative_fluctuation(1.0, 100.0) == doctest::Approx(1.0).epsilon(1e-15));
    FluctuationSettings e100;
    e100.confidence_exponent = 100.0;
    CHECK(relative_fluctuation(1e-4, 1e10, e100) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK_THROWS_AS(relative_fluctuation(0.0, 1e10), DomainError);
    // The deviation that gives r * s is exactly at the e^{-E} confidence level.
    const double s = 3e-5, n0 = 2e9;
    CHECK(confidence_bound(relative_fluctuation(s, n0) * s, s, n0) == doctest::Approx(std::exp(-25.0)));
}

TEST_CASE("finite_bound table cells") {
    const auto w2 = finite_bound(table_rates(0.25, 0.41, 1e-4), ProtocolParams(0.25, 0.41), table1::budget(8e10));
    CHECK(std::abs(w2.delta_upper - 0.309) <= 0.01);
    CHECK(w2.method == BoundMethod::wang_finite);
    const auto w1 = finite_bound(table_rates(0.3, 0.43, 1e-3), ProtocolParams(0.3, 0.43), table1::budget(1e10));
    CHECK(std::abs(w1.delta_upper - 0.344) <= 0.01);
    const auto w2p = finite_bound(table_rates(0.3, 0.45, 1e-4), ProtocolParams(0.3, 0.45), table1::budget(8e10));
    CHECK(std::abs(w2p.delta_prime_upper - 0.458) <= 0.01);
}

TEST_CASE("finite_bound approaches the asymptotic bound") {
    for (double eta : {1e-3, 1e-4}) {
        const ProtocolParams p(0.3, 0.45);
        const auto rates = physical_rates(0.3, 0.45, eta);
        const auto fin = finite_bound(rates, p, PulseBudget::make(1e30, 1e30, 0));
        const auto asy = wang_asymptotic_bound(rates, p);
        CHECK(fin.delta_upper >= asy.delta_upper - 1e-12);
        CHECK(fin.delta_upper - asy.delta_upper < 1e-3);
    }
}

TEST_CASE("finite_bound matches a direct search over s_c") {
    for (auto [mu, mp, eta, n] : {std::tuple{0.2, 0.34, 1e-3, 1e10}, std::tuple{0.25, 0.41, 1e-4, 8e10},
                                  std::tuple{0.35, 0.47, 1e-4, 8e10}, std::tuple{0.3, 0.5, 1e-3, 1e9}}) {
        const auto rates = physical_rates(mu, mp, eta);
        const auto fin = finite_bound(rates, ProtocolParams(mu, mp), PulseBudget::make(n, n, 0));
        const double searched = oracle::finite_by_search(mu, mp, rates.s0, rates.s_mu, rates.s_mu_prime, n);
        CHECK(fin.delta_upper == doctest::Approx(searched).epsilon(1e-6));
    }
}

TEST_CASE("finite_bound: rearranged inequality agrees with the iteration") {
    const ProtocolParams p(0.3, 0.45);
    const auto rates = physical_rates(0.3, 0.45, 1e-4);
    const auto budget = PulseBudget::make(8e10, 8e10, 0);
    const auto fin = finite_bound(rates, p, budget);
    const auto r = fluctuations_at(fin.s1_lower, fin.sc_upper, p, budget, FluctuationSettings{});
    CHECK(delta_from_inequality(rates, p, r, fin.s1_lower) == doctest::Approx(fin.delta_upper).epsilon(1e-8));
}

TEST_CASE("finite_bound self-consistency") {
    const ProtocolParams p(0.25, 0.41);
    const auto rates = physical_rates(0.25, 0.41, 1e-4);
    const auto budget = PulseBudget::make(8e10, 8e10, 0);
    const double c = decompose(p).c;
    const auto fin = finite_bound(rates, p, budget, {}, 1e-12);
    const auto r = fluctuations_at(fin.s1_lower, fin.sc_upper, p, budget, FluctuationSettings{});
    const double again = c * solve_sc_fixed(rates, p, r) / rates.s_mu;
    CHECK(std::abs(again - fin.delta_upper) < 1e-10);
}

TEST_CASE("finite_bound vacuous cases") {
    const ProtocolParams p(0.3, 0.45);
    // Tiny budget: r_c >= 1.
    const auto tiny = finite_bound(physical_rates(0.3, 0.45, 1e-3), p, PulseBudget::make(1e4, 1e4, 0));
    CHECK(tiny.vacuous);
    CHECK(tiny.delta_upper == 1.0);
    // PNS rates: asymptotic bound already >= 1.
    const auto pns = expected_rates(PnsAttack{1.0, 0.0}, p);
    const auto v = finite_bound(pns, p, PulseBudget::make(1e10, 1e10, 0));
    CHECK(v.vacuous);
    CHECK(v.delta_prime_upper == 1.0);
    CHECK_THROWS_AS(finite_bound(ObservedRates::make(0, 0, 1e-4), p, PulseBudget::make(1, 1, 0)), DomainError);
}

TEST_CASE("finite_bound non-convergence carries the iterate") {
    const ProtocolParams p(0.3, 0.45);
    try {
        finite_bound(physical_rates(0.3, 0.45, 1e-4), p, PulseBudget::make(8e10, 8e10, 0), {}, 1e-10, 1);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 1);
        CHECK(e.last_sc() > 0.0);
    }
}

TEST_CASE("explicit r0 and min-over-classes settings") {
    const ProtocolParams p(0.3, 0.45);
    const auto rates = physical_rates(0.3, 0.45, 1e-4);
    const auto budget = PulseBudget::make(8e10, 8e10, 0);
    const double base = finite_bound(rates, p, budget).delta_upper;
    FluctuationSettings r0;
    r0.r0 = 0.1;
    // s0' = (1 + r0) s0 credits more of Y_mu' to the vacuum, so r0 > 0 lowers the bound.
    const double with_r0 = finite_bound(rates, p, budget, r0).delta_upper;
    CHECK(with_r0 < base);
    CHECK(base - with_r0 < 0.01);
    FluctuationSettings minpop;
    minpop.subpopulation = SubPopulation::min_over_classes;
    CHECK(finite_bound(rates, p, PulseBudget::make(8e10, 1e9, 0), minpop).delta_upper > base);
    CHECK(finite_bound(rates, p, PulseBudget::make(8e10, 1e9, 0)).delta_upper == doctest::Approx(base));
}

TEST_CASE("property: finite >= asymptotic and non-increasing in budget") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u_log_eta(-4.0, -2.0);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        const auto [mu, mp] = oracle::random_pair(rng, 0.1, 0.5);
        const ProtocolParams p(mu, mp);
        const double eta = std::pow(10.0, u_log_eta(rng));
        const auto rates = physical_rates(mu, mp, eta);
        const double asy = wang_asymptotic_bound(rates, p).delta_upper;
        double prev = 2.0;
        for (double n : {1e8, 1e9, 1e10, 1e11, 1e12, 1e15}) {
            const auto fin = finite_bound(rates, p, PulseBudget::make(n, n, 0));
            REQUIRE(fin.delta_upper >= asy - 1e-12);
            REQUIRE(fin.delta_upper <= prev + 1e-12);
            prev = fin.delta_upper;
            ++checked;
        }
    }
    CHECK(checked == 1800);
}

TEST_CASE("property: finite bound is sound for exact strategy rates") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto [mu, mp] = oracle::random_pair(rng, 0.1, 0.5);
        std::vector<double> y(kDefaultYieldTableSize);
        for (auto& v : y) v = 1e-2 * u(rng);
        const YieldTable scenario{1e-6 * u(rng), y};
        const ProtocolParams p(mu, mp);
        const auto rates = expected_rates(scenario, p);
        const auto truth = true_delta(scenario, p);
        const auto fin = finite_bound(rates, p, PulseBudget::make(1e10, 1e10, 0));
        if (fin.delta_upper < truth.delta - 1e-12) ++violations;
        if (fin.delta_prime_upper < truth.delta_prime - 1e-12) ++violations;
    }
    CHECK(violations == 0);
}
