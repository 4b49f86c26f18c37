#pragma once

#include <stdexcept>
#include <string>

namespace ssn {

/// A call-contract violation: mismatched base points, wrong dimensions,
/// invalid configuration values.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the geometric domain of an operation, e.g. a near-antipodal
/// pair where the minimal geodesic is not unique.
class GeodesicDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A linear operator on a tangent space was too close to singular for the
/// requested operation. Carries the offending smallest singular value.
class SingularOperatorError : public std::runtime_error {
public:
    SingularOperatorError(const std::string& what, double smallest_singular_value)
        : std::runtime_error(what), smallest_sv_(smallest_singular_value) {}

    [[nodiscard]] double smallest_singular_value() const { return smallest_sv_; }

private:
    double smallest_sv_;
};

/// Not enough usable data to form an estimate.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ssn
