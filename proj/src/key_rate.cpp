#include "decoy/key_rate.hpp"

#include <cmath>

#include "decoy/errors.hpp"

namespace decoy {

KeyRateInput KeyRateInput::make(double delta, double qber) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw ParameterError("tagged fraction must lie in [0, 1]");
    if (!(qber >= 0.0 && qber <= 0.5)) throw ParameterError("error rate must lie in [0, 0.5]");
    return KeyRateInput{delta, qber};
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("binary_entropy: argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

KeyRate gllp_rate(const KeyRateInput& input) {
    const double untagged = 1.0 - input.delta;
    if (untagged <= 0.0) return {0.0, input.qber > 0.0};
    const double corrected = input.qber / untagged;
    if (corrected > 0.5) return {0.0, true};
    const double raw = untagged - binary_entropy(input.qber) - untagged * binary_entropy(corrected);
    if (raw < 0.0) return {0.0, true};
    return {raw, false};
}

}  // namespace decoy
