#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixneu {

enum class ErrorKind {
    InvalidGeometry,
    InadmissibleIntegrability,
    Assembly,
    SizeMismatch,
    DegenerateWeight,
    HypothesisViolation,
    PoincareViolation,
    ZeroFluxViolation,
    SingularSystem,
    IndefiniteDirection,
    InsufficientEigenvalues,
    NonpositiveInput,
    Config,
    Io,
};

/// Machine-readable class name, e.g. "degenerate-weight".
std::string_view error_class(ErrorKind kind) noexcept;

/// CLI exit status for an error kind: 2 config, 3 hypothesis, 4 numerical.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace mixneu
