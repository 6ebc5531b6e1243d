#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbergman {

/// Failure categories raised by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  InvalidCell,
  BranchViolation,
  InvalidDelta,
  NonConvergentRatio,
  PathThroughPrevertex,
  QuadratureFailure,
  NoConvergence,
  DegenerateInitialization,
  SectorAssumptionFailed,
  GridTooCoarse,
  OutOfDomain,
  DerivativeUnavailable,
  MapEvaluationFailure,
  SeriesNotConverged,
  TailNotNegligible,
  NoDecayDetected,
  EstimateAboveTolerance,
  NotAWeight,
  NotSummable,
  UnderflowBeyondN,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidCell: return "InvalidCell";
    case ErrorKind::BranchViolation: return "BranchViolation";
    case ErrorKind::InvalidDelta: return "InvalidDelta";
    case ErrorKind::NonConvergentRatio: return "NonConvergentRatio";
    case ErrorKind::PathThroughPrevertex: return "PathThroughPrevertex";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateInitialization: return "DegenerateInitialization";
    case ErrorKind::SectorAssumptionFailed: return "SectorAssumptionFailed";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorKind::MapEvaluationFailure: return "MapEvaluationFailure";
    case ErrorKind::SeriesNotConverged: return "SeriesNotConverged";
    case ErrorKind::TailNotNegligible: return "TailNotNegligible";
    case ErrorKind::NoDecayDetected: return "NoDecayDetected";
    case ErrorKind::EstimateAboveTolerance: return "EstimateAboveTolerance";
    case ErrorKind::NotAWeight: return "NotAWeight";
    case ErrorKind::NotSummable: return "NotSummable";
    case ErrorKind::UnderflowBeyondN: return "UnderflowBeyondN";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace pbergman
