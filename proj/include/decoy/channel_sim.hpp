#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "decoy/bound_engine.hpp"
#include "decoy/finite_stats.hpp"

namespace decoy {

/// Lossy channel without an eavesdropper. `eta` is the overall transmittance
/// (channel, optics and detector efficiency); dark counts are combined with
/// signal clicks as independent events, S = 1 - (1 - s0) e^{-eta mu}.
///
/// With `dark_counts_in_signal == false` the signal classes see only channel
/// clicks, S = 1 - e^{-eta mu}, while the vacuum class still reports s0.
/// This is the rate model that reproduces the reference table (see table1.hpp).
struct NoEve {
    double eta = 0.0;
    double s0 = 0.0;
    bool dark_counts_in_signal = true;
};

/// Photon-number-splitting attack: single-photon pulses are blocked, a
/// fraction q of multi-photon pulses reaches Bob losslessly.
struct PnsAttack {
    double q = 1.0;
    double s0 = 0.0;
};

/// Arbitrary attack expressed as per-photon-number yields, applied
/// identically to both signal classes. yields[i] is s_{i+1}; photon numbers
/// beyond the table have zero yield.
struct YieldTable {
    double s0 = 0.0;
    std::vector<double> yields;
};

using ChannelScenario = std::variant<NoEve, PnsAttack, YieldTable>;

inline constexpr int kDefaultYieldTableSize = 20;

/// Throws ParameterError on probabilities outside [0, 1] or a yields table
/// shorter than two entries.
void validate(const ChannelScenario& scenario);

/// Counting rate of photon-number state |n><n| in a signal class.
double photon_yield(const ChannelScenario& scenario, long n);

/// Vacuum yield observed in Y_0.
double vacuum_class_rate(const ChannelScenario& scenario);

/// Counting rate of a dephased coherent state of intensity `mu` in a signal class.
double class_rate(const ChannelScenario& scenario, double mu);

ObservedRates expected_rates(const ChannelScenario& scenario, const ProtocolParams& params);

struct TrueDelta {
    double delta = 0.0;        // Y_mu
    double delta_prime = 0.0;  // Y_mu'
};

/// Fraction of counts caused by multi-photon pulses, per class.
TrueDelta true_delta(const ChannelScenario& scenario, const ProtocolParams& params);

struct ClassCounts {
    std::int64_t vacuum = 0;
    std::int64_t mu = 0;
    std::int64_t mu_prime = 0;
};

struct SimulatedObservation {
    ObservedRates rates;
    std::optional<ClassCounts> counts;
    PulseBudget budget;
    std::optional<std::uint64_t> seed;
};

/// SplitMix64 finaliser of root + (index + 1) * golden gamma. Used to derive
/// per-class and per-sweep-cell seeds from a single root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// Binomial(n, p) draw from a std::mt19937_64 seeded with `seed`.
/// std::binomial_distribution is exact in distribution for every n.
std::int64_t sample_binomial(std::int64_t n, double p, std::uint64_t seed);

/// Draws per-class click counts around expected_rates. Class k (vacuum 0,
/// mu 1, mu' 2) uses derive_seed(seed, k). Budgets must fit in int64.
SimulatedObservation sample_observation(const ChannelScenario& scenario, const ProtocolParams& params,
                                        const PulseBudget& budget, std::uint64_t seed);

}  // namespace decoy
