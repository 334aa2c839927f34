#pragma once

#include <stdexcept>
#include <string>

namespace adiabatica {

struct NumericalGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonHermitianEvaluation : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct GapViolation : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct MethodDisagreement : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct FormulaDisagreement : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct NonPositiveDensity : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct ResidualTooLarge : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct SingularForm : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct StepFailure : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct NonHermitianSymbol : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct GridMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ClusterGapViolation : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct QuadratureNotConverged : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct VortexOnPlaquette : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct DegenerateFit : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

} // namespace adiabatica
