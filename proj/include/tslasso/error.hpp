#pragma once

#include <stdexcept>
#include <string>

namespace tslasso {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of the operands do not agree.
class DimensionError : public Error
{
public:
    using Error::Error;
};

/// Caller supplied a value outside the documented domain.
class ArgumentError : public Error
{
public:
    using Error::Error;
};

/// An iterative kernel failed to converge. Carries the best estimate reached.
class NumericError : public Error
{
public:
    NumericError(const std::string& what, double best_estimate)
        : Error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

/// A linear recursion is not stable (spectral radius >= 1).
class StabilityError : public Error
{
public:
    StabilityError(const std::string& what, double radius)
        : Error(what), radius_(radius) {}

    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

class UnsupportedError : public Error
{
public:
    using Error::Error;
};

/// Exhaustive enumeration would exceed its work budget.
class BudgetError : public Error
{
public:
    using Error::Error;
};

/// A sample-size precondition is violated. Carries the smallest admissible T.
class ThresholdError : public Error
{
public:
    ThresholdError(const std::string& what, double required_T)
        : Error(what), required_T_(required_T) {}

    double required_T() const noexcept { return required_T_; }

private:
    double required_T_;
};

/// A design column is identically zero but the response correlates with it.
class DegenerateColumnError : public Error
{
public:
    DegenerateColumnError(const std::string& what, std::size_t column)
        : Error(what), column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error
{
public:
    using Error::Error;
};

class IoError : public Error
{
public:
    using Error::Error;
};

} // namespace tslasso
