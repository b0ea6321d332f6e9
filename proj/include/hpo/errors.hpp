#pragma once

#include <stdexcept>
#include <string>

namespace hpo {

// Error categories map one-to-one onto CLI exit codes so scripts can
// distinguish bad inputs from resource limits from numerical failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual int exit_code() const { return 1; }
};

// Rejected input: malformed files, out-of-range parameters, contract
// violations such as off-mask residual coordinates. Exit code 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
    int exit_code() const override { return 2; }
};

// Request exceeds an enumeration/density ceiling (e.g. materializing a mask
// above n = 6); the message names the closed-form alternative. Exit code 3.
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error(what) {}
    int exit_code() const override { return 3; }
};

// Numerically unusable operator (e.g. a learned channel whose dense form is
// too ill-conditioned to invert). Carries the measured condition number.
// Exit code 4.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, double condition_number)
        : Error(what), condition_number_(condition_number) {}
    int exit_code() const override { return 4; }
    double condition_number() const { return condition_number_; }

private:
    double condition_number_;
};

}  // namespace hpo
