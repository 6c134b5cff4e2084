#pragma once

#include <stdexcept>
#include <string>

namespace cpdsss {

// Bad argument or violated precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (x <= 0, p outside (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Code allocation cannot fit the requested users into N samples.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, int max_users)
        : std::runtime_error(what), max_users_(max_users) {}
    int max_users() const noexcept { return max_users_; }

private:
    int max_users_;
};

// Configuration that is well-formed but not supported by the receiver (e.g. K = 0 detection).
class UnsupportedConfig : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative solver failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Experiment configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cpdsss
