// Typed errors shared by every module of the library.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rstp {

enum class ErrorKind {
    NonStochasticMatrix,
    NotIrreducible,
    InvalidModel,
    OutOfHorizon,
    OutOfRange,
    ExplosionGuard,
    Overflow,
    NotMixingWithinBound,
    NoBridge,
    GapTooSmall,
    NotAdmissible,
    PointOutsideCylinder,
    NotContracting,
    NoSignChange,
    NotContractingPotential,
    TargetOutsideFiber,
    EmptyCover,
    ScheduleInfeasible,
    InvalidSchedule,
    EmptySelection,
    EmptyInput,
    DegenerateFit,
    ConfigError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Config-level errors (exit code 2 in the CLI) versus numeric guard trips (exit code 3).
bool is_configuration_error(ErrorKind kind);

} // namespace rstp
