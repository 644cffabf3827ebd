#pragma once

#include <stdexcept>
#include <string>

namespace opcodec {

/// Failure class, used by the CLI to choose an exit code: bad inputs or
/// configuration (exit 2) versus breakdown during computation (exit 3).
enum class FailureKind { validation, numerical };

class Error : public std::runtime_error {
public:
    Error(FailureKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    FailureKind kind() const noexcept { return kind_; }

private:
    FailureKind kind_;
};

/// A vector that should have been linearly independent of its predecessors
/// produced a (near-)zero Gram-Schmidt residual.
struct DependentInput : Error {
    explicit DependentInput(const std::string& what)
        : Error(FailureKind::numerical, what) {}
};

struct ZeroVector : Error {
    explicit ZeroVector(const std::string& what)
        : Error(FailureKind::validation, what) {}
};

struct NotSymmetric : Error {
    explicit NotSymmetric(const std::string& what)
        : Error(FailureKind::validation, what) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& what)
        : Error(FailureKind::numerical, what) {}
};

struct GeometryMismatch : Error {
    explicit GeometryMismatch(const std::string& what)
        : Error(FailureKind::validation, what) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what)
        : Error(FailureKind::validation, what) {}
};

/// The Gram matrix of the orthonormalized data turned out numerically
/// singular: the generating operator has a nontrivial nullspace on the
/// training span.
struct DegenerateData : Error {
    explicit DegenerateData(const std::string& what)
        : Error(FailureKind::numerical, what) {}
};

struct DegenerateSpectrum : Error {
    explicit DegenerateSpectrum(const std::string& what)
        : Error(FailureKind::numerical, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what)
        : Error(FailureKind::validation, what) {}
};

}  // namespace opcodec
