#pragma once

#include <stdexcept>
#include <string>

namespace rough {

// Invalid parameter values (H out of range, epsilon below the floor, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Adaptive quadrature failed to reach the requested tolerance.
// Carries the best estimate and the residual error bound.
class ToleranceError : public std::runtime_error {
public:
    ToleranceError(const std::string& what, double estimate, double residual)
        : std::runtime_error(what), estimate_(estimate), residual_(residual) {}
    double estimate() const { return estimate_; }
    double residual() const { return residual_; }

private:
    double estimate_;
    double residual_;
};

// Sewing iteration whose inter-level differences refuse to contract.
class RegularityError : public std::runtime_error {
public:
    RegularityError(const std::string& what, double observed_ratio)
        : std::runtime_error(what), ratio_(observed_ratio) {}
    double observed_ratio() const { return ratio_; }

private:
    double ratio_;
};

// Not enough data for an estimator (degenerate grid, empty sample set, ...).
class InsufficientDataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Linear algebra failure (factorization did not succeed even with jitter).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rough
