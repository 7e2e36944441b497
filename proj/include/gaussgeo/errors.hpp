#ifndef GAUSSGEO_ERRORS_HPP
#define GAUSSGEO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gaussgeo {

/// Thrown when an argument violates a documented precondition
/// (wrong dimension, non-SPD matrix, invalid parameter range, ...).
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when an iterative routine fails to converge or an
/// intermediate quantity leaves its valid numeric domain.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gaussgeo

#endif
