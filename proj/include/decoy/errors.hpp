#pragma once

#include <stdexcept>
#include <string>

namespace decoy {

/// Argument outside the mathematical domain of an operation (negative mean
/// photon number, zero counting rate in a denominator, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid protocol or scenario parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Convex decomposition of rho_mu' produced a negative weight.
class DecompositionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap. Carries the last iterate.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_sc, double last_s1, int iterations)
        : std::runtime_error(what), last_sc_(last_sc), last_s1_(last_s1), iterations_(iterations) {}

    double last_sc() const noexcept { return last_sc_; }
    double last_s1() const noexcept { return last_s1_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_sc_;
    double last_s1_;
    int iterations_;
};

}  // namespace decoy
