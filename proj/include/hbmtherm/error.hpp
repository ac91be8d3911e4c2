#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hbmtherm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Stack description violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Geometry does not fit (dies outside footprint and similar).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Grid too coarse for the smallest geometric feature.
class RefinementError : public Error {
public:
    RefinementError(const std::string& what, double suggested_cell)
        : Error(what), suggested_cell_(suggested_cell) {}

    [[nodiscard]] double suggested_cell() const noexcept { return suggested_cell_; }

private:
    double suggested_cell_;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

/// Iterative solve did not reach the requested tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> residual_history)
        : Error(what), history_(std::move(residual_history)) {}

    [[nodiscard]] const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace hbmtherm
