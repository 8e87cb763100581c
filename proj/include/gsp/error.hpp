#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gsp {

enum class Errc {
  InvalidGraph,
  ZeroVariance,
  LengthMismatch,
  EmptySeries,
  NotSymmetric,
  DimensionMismatch,
  NonFiniteGain,
  SingularSystem,
  EmptyMask,
  EmptyWindows,
  ShapeMismatch,
  BudgetTooLarge,
  SeriesTooShort,
  EmptyTrainSet,
  DivergedLoss,
  BinTooSmall,
  ReferenceMissing,
  NoEvents,
  ConfigInvalid,
  RangeOutOfBounds,
  ParseError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidGraph: return "InvalidGraph";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteGain: return "NonFiniteGain";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::EmptyWindows: return "EmptyWindows";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::BudgetTooLarge: return "BudgetTooLarge";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::EmptyTrainSet: return "EmptyTrainSet";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::BinTooSmall: return "BinTooSmall";
    case Errc::ReferenceMissing: return "ReferenceMissing";
    case Errc::NoEvents: return "NoEvents";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::RangeOutOfBounds: return "RangeOutOfBounds";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code. The message is prefixed
/// with the code name so CLI output stays greppable.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gsp
