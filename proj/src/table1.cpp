#include "decoy/table1.hpp"

#include "decoy/bound_engine.hpp"
#include "decoy/finite_stats.hpp"

namespace decoy::table1 {

NoEve scenario(double eta, double s0) { return NoEve{eta, s0, false}; }

PulseBudget budget(double n) { return PulseBudget::make(n, n, kVacuumPulses); }

std::vector<Entry> reproduce() {
    std::vector<Entry> out;
    for (std::size_t i = 0; i < kMu.size(); ++i) {
        out.push_back({"Delta_H", kMu[i], 0.0, 0.0, 0.0, hwang_optimized(kMu[i]), kHwangMu[i]});
    }
    for (std::size_t i = 0; i < kMuPrimeW2.size(); ++i) {
        out.push_back({"Delta_H", kMuPrimeW2[i], 0.0, 0.0, 0.0, hwang_optimized(kMuPrimeW2[i]), kHwangMuPrime[i]});
    }
    for (std::size_t i = 0; i < kMu.size(); ++i) {
        const ProtocolParams p(kMu[i], kMuPrimeW1[i]);
        out.push_back({"Delta_R", kMu[i], 0.0, kEtaW1, 0.0, true_delta(scenario(kEtaW1), p).delta, kRealMu[i]});
    }
    for (std::size_t i = 0; i < kMu.size(); ++i) {
        const ProtocolParams p(kMu[i], kMuPrimeW2[i]);
        out.push_back({"Delta_R", kMuPrimeW2[i], 0.0, kEtaW2, 0.0, true_delta(scenario(kEtaW2), p).delta_prime,
                       kRealMuPrime[i]});
    }
    for (std::size_t i = 0; i < kMu.size(); ++i) {
        const ProtocolParams p(kMu[i], kMuPrimeW1[i]);
        const BoundReport r = finite_bound(expected_rates(scenario(kEtaW1), p), p, budget(kPulsesW1));
        out.push_back({"Delta_W1", kMu[i], kMuPrimeW1[i], kEtaW1, kPulsesW1, r.delta_upper, kW1[i]});
    }
    std::vector<Entry> primes;
    for (std::size_t i = 0; i < kMu.size(); ++i) {
        const ProtocolParams p(kMu[i], kMuPrimeW2[i]);
        const BoundReport r = finite_bound(expected_rates(scenario(kEtaW2), p), p, budget(kPulsesW2));
        out.push_back({"Delta_W2", kMu[i], kMuPrimeW2[i], kEtaW2, kPulsesW2, r.delta_upper, kW2[i]});
        primes.push_back({"Delta'_W2", kMu[i], kMuPrimeW2[i], kEtaW2, kPulsesW2, r.delta_prime_upper, kW2Prime[i]});
    }
    out.insert(out.end(), primes.begin(), primes.end());
    return out;
}

}  // namespace decoy::table1
