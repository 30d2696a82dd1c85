#include <cmath>

#include "decoy/errors.hpp"
#include "decoy/feasibility.hpp"
#include "decoy/table1.hpp"
#include "doctest.h"

using namespace decoy;

TEST_CASE("WeakDecoySetup validation") {
    CHECK_NOTHROW(WeakDecoySetup{}.validate());
    CHECK_THROWS_AS((WeakDecoySetup{1e-4, 1e-6, 2e-4, 8e7, 25}.validate()), ParameterError);
    CHECK_THROWS_AS((WeakDecoySetup{1.0, 1e-6, 1e-4, 8e7, 25}.validate()), ParameterError);
    CHECK_THROWS_AS((WeakDecoySetup{1e-4, 1e-6, 1e-4, 0.0, 25}.validate()), ParameterError);
}

TEST_CASE("weak_decoy_s1_bound") {
    CHECK(weak_decoy_s1_bound(WeakDecoySetup{}) == doctest::Approx(5.000500025000833e-5).epsilon(1e-13));
    CHECK(weak_decoy_s1_bound(WeakDecoySetup{}) == doctest::Approx(5e-5).epsilon(1e-3));
    WeakDecoySetup half;
    half.mu_v = 5e-5;
    CHECK(weak_decoy_s1_bound(half) == doctest::Approx(7.500375009375156e-5).epsilon(1e-13));
    WeakDecoySetup tiny;
    tiny.mu_v = 1e-12;
    CHECK(weak_decoy_s1_bound(tiny) == doctest::Approx(1e-4).epsilon(1e-7));
}

TEST_CASE("required_pulses") {
    const WeakDecoySetup s;
    CHECK(required_pulses(s, 1e-3) == 1e14);
    CHECK(required_pulses(s, 1e-2) == 1e12);
    CHECK(required_pulses(s, 1.0) == doctest::Approx(4 * 25 / 1e-6));
    WeakDecoySetup low_dark = s;
    low_dark.s0 = 1e-7;
    CHECK(required_pulses(low_dark, 1e-3) == 1e15);
    CHECK_THROWS(required_pulses(s, 0.0));
    CHECK_THROWS(required_pulses(s, 1.5));
    // Monotone decreasing in s0 and target.
    double prev = INFINITY;
    for (double s0 : {1e-8, 1e-7, 1e-6, 1e-5}) {
        WeakDecoySetup w = s;
        w.s0 = s0;
        CHECK(required_pulses(w, 1e-3) < prev);
        prev = required_pulses(w, 1e-3);
    }
    CHECK(required_pulses(s, 2e-3) < required_pulses(s, 1e-3));
}

TEST_CASE("acquisition_time") {
    CHECK(acquisition_time(1e14, 8e7) == 1.25e6);
    CHECK(acquisition_time(1e14, 8e7) / kSecondsPerDay == doctest::Approx(14.46759259259259));
    CHECK(acquisition_time(0, 8e7) == 0.0);
    CHECK(acquisition_time(8e10, 8e7) == doctest::Approx(1000.0));
}

TEST_CASE("feasibility_report contrast") {
    const auto rep = feasibility_report(WeakDecoySetup{}, 1e-3);
    CHECK(rep.required_pulses == 1e14);
    CHECK(rep.days > 14.0);
    CHECK_FALSE(rep.practical);
    CHECK(rep.dark_clicks_per_pulse == 1e-6);
    CHECK(rep.signal_clicks_per_pulse <= 1e-8 * 1.0001);
    CHECK(acquisition_time(table1::kPulsesW2, 8e7) < 3600.0);

    WeakDecoySetup fast;
    fast.rep_rate = 1.6e8;
    CHECK(feasibility_report(fast, 1e-3).days == doctest::Approx(rep.days / 2));
}
