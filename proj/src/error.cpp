#include "rstp/error.hpp"

namespace rstp {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NonStochasticMatrix: return "NonStochasticMatrix";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::OutOfHorizon: return "OutOfHorizon";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ExplosionGuard: return "ExplosionGuard";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NotMixingWithinBound: return "NotMixingWithinBound";
    case ErrorKind::NoBridge: return "NoBridge";
    case ErrorKind::GapTooSmall: return "GapTooSmall";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::PointOutsideCylinder: return "PointOutsideCylinder";
    case ErrorKind::NotContracting: return "NotContracting";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::NotContractingPotential: return "NotContractingPotential";
    case ErrorKind::TargetOutsideFiber: return "TargetOutsideFiber";
    case ErrorKind::EmptyCover: return "EmptyCover";
    case ErrorKind::ScheduleInfeasible: return "ScheduleInfeasible";
    case ErrorKind::InvalidSchedule: return "InvalidSchedule";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

bool is_configuration_error(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NonStochasticMatrix:
    case ErrorKind::NotIrreducible:
    case ErrorKind::InvalidModel:
    case ErrorKind::NotContracting:
    case ErrorKind::NotContractingPotential:
    case ErrorKind::InvalidSchedule:
    case ErrorKind::ConfigError:
    case ErrorKind::TargetOutsideFiber:
    case ErrorKind::OutOfHorizon:
    case ErrorKind::GapTooSmall:
        return true;
    default:
        return false;
    }
}

} // namespace rstp
