#include "mixneu/error.hpp"

namespace mixneu {

std::string_view error_class(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidGeometry: return "invalid-geometry";
        case ErrorKind::InadmissibleIntegrability: return "inadmissible-integrability";
        case ErrorKind::Assembly: return "assembly";
        case ErrorKind::SizeMismatch: return "size-mismatch";
        case ErrorKind::DegenerateWeight: return "degenerate-weight";
        case ErrorKind::HypothesisViolation: return "hypothesis-violation";
        case ErrorKind::PoincareViolation: return "discrete-poincare-violation";
        case ErrorKind::ZeroFluxViolation: return "zero-flux-violation";
        case ErrorKind::SingularSystem: return "singular-system";
        case ErrorKind::IndefiniteDirection: return "indefinite-direction";
        case ErrorKind::InsufficientEigenvalues: return "insufficient-eigenvalues";
        case ErrorKind::NonpositiveInput: return "nonpositive-input";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Io:
        case ErrorKind::InvalidGeometry:
        case ErrorKind::SizeMismatch:
        case ErrorKind::NonpositiveInput:
            return 2;
        case ErrorKind::InadmissibleIntegrability:
        case ErrorKind::DegenerateWeight:
        case ErrorKind::HypothesisViolation:
        case ErrorKind::ZeroFluxViolation:
            return 3;
        default:
            return 4;
    }
}

}  // namespace mixneu
