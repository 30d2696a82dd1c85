#pragma once

#include <array>
#include <string>
#include <vector>

#include "decoy/channel_sim.hpp"

namespace decoy::table1 {

// Caption parameters of the published tagged-fraction table.
inline constexpr double kDarkCount = 1e-6;
inline constexpr double kEtaW1 = 1e-3;
inline constexpr double kEtaW2 = 1e-4;
inline constexpr double kPulsesW1 = 1e10;
inline constexpr double kPulsesW2 = 8e10;
inline constexpr double kVacuumPulses = 4e9;

inline constexpr std::array<double, 4> kMu{0.2, 0.25, 0.3, 0.35};
inline constexpr std::array<double, 4> kMuPrimeW1{0.34, 0.38, 0.43, 0.45};
inline constexpr std::array<double, 4> kMuPrimeW2{0.39, 0.41, 0.45, 0.47};

// Printed values, as fractions.
inline constexpr std::array<double, 4> kHwangMu{0.445, 0.529, 0.604, 0.670};
inline constexpr std::array<double, 4> kHwangMuPrime{0.718, 0.740, 0.780, 0.798};
inline constexpr std::array<double, 4> kRealMu{0.183, 0.222, 0.259, 0.295};
inline constexpr std::array<double, 4> kRealMuPrime{0.323, 0.337, 0.362, 0.375};
inline constexpr std::array<double, 4> kW1{0.234, 0.289, 0.344, 0.399};
inline constexpr std::array<double, 4> kW2{0.256, 0.309, 0.362, 0.415};
inline constexpr std::array<double, 4> kW2Prime{0.401, 0.422, 0.458, 0.486};

/// No-Eve channel as used for the published values: dark counts appear only
/// in the vacuum class.
NoEve scenario(double eta, double s0 = kDarkCount);

/// Pulse budget for a column: `n` pulses in each signal class.
PulseBudget budget(double n);

struct Entry {
    std::string row;  // Delta_H, Delta_R, Delta_W1, Delta_W2, Delta'_W2
    double mu = 0.0;
    double mu_prime = 0.0;  // 0 when the row depends on one intensity only
    double eta = 0.0;       // 0 when transmittance does not enter
    double n_pulses = 0.0;  // 0 for asymptotic rows
    double computed = 0.0;
    double printed = 0.0;
};

/// Recomputes every cell of the table in row order.
std::vector<Entry> reproduce();

}  // namespace decoy::table1
