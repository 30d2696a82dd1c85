#pragma once

namespace decoy {

/// Tagged fraction and detected bit-flip error rate for one signal class.
struct KeyRateInput {
    double delta = 0.0;
    double qber = 0.0;

    /// Throws ParameterError unless delta in [0,1] and qber in [0,0.5].
    static KeyRateInput make(double delta, double qber);
};

struct KeyRate {
    double rate = 0.0;
    bool clamped = false;  // raw rate was negative or undefined and reported as 0
};

/// H(x) in bits, with H(0) = H(1) = 0.
double binary_entropy(double x);

/// 1 - Delta - H(t) - (1 - Delta) H(t / (1 - Delta)), floored at zero.
KeyRate gllp_rate(const KeyRateInput& input);

}  // namespace decoy
