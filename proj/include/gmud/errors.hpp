// errors.hpp
#ifndef GMUD_ERRORS_HPP
#define GMUD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gmud {

/// Operand shapes do not fit the operation.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Determinant or pivot fell below the singularity threshold.
class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter lies outside the interval where the construction exists,
/// e.g. r outside [lambda2, lambda1].
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed bitstrings, bit counts, manifests or text input.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gmud

#endif // GMUD_ERRORS_HPP
