#pragma once

#include <stdexcept>
#include <string>

namespace levymp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// bad numeric input (wrong sign, out of range, wrong shape)
class DomainError : public Error {
public:
    using Error::Error;
};

// some eigenvalue real part gives an alpha outside (0, 2]
class NonFullSpectrum : public Error {
public:
    using Error::Error;
};

// Jordan structure cannot be decided at the requested tolerance
class AmbiguousJordan : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

// importance weights too heavy for the estimate to be trusted
class ProposalMismatch : public Error {
public:
    ProposalMismatch(const std::string& what, double estimate, double ratio)
        : Error(what), estimate_(estimate), ratio_(ratio) {}
    double estimate() const noexcept { return estimate_; }
    double weight_ratio() const noexcept { return ratio_; }

private:
    double estimate_;
    double ratio_;
};

// exponent fit requested outside the regime where the power law holds
class ValidityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& msg)
        : Error(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace levymp
