#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct GeometryError : Error {
    using Error::Error;
};

struct MeshQualityError : Error {
    using Error::Error;
};

struct DegenerateJacobian : Error {
    using Error::Error;
};

struct LinearSolveFailure : Error {
    using Error::Error;
};

/// Nonlinear iteration exhausted its budget. Carries the best iterate and
/// its residual so callers can decide whether it is still usable.
struct NonConvergence : Error {
    double best_residual;
    std::vector<double> best_iterate;
    NonConvergence(const std::string& msg, double residual,
                   std::vector<double> iterate = {})
        : Error(msg), best_residual(residual), best_iterate(std::move(iterate)) {}
};

struct ZeroField : Error {
    using Error::Error;
};

struct TagNotFound : Error {
    using Error::Error;
};

struct BracketFailure : Error {
    using Error::Error;
};

struct PointLocationFailure : Error {
    using Error::Error;
};

struct InsufficientRecords : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace plap
