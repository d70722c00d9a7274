#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wd {

enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  GapClosure,
  NonCoprimeFlux,
  OddMeshSize,
  NonCommutingGenerators,
  CovarianceMismatch,
  BranchDegenerate,
  ProjectorsTooFar,
  SmoothingGramSingular,
  NearDependent,
  ReprojectionSingular,
  PlaquetteTooCoarse,
  SupercellTooSmall,
  InsufficientSupport,
  Inconclusive,
  TruncationNotInjective,
  GramTooSmall,
  TopologicalObstruction,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::GapClosure: return "GapClosure";
    case ErrorCode::NonCoprimeFlux: return "NonCoprimeFlux";
    case ErrorCode::OddMeshSize: return "OddMeshSize";
    case ErrorCode::NonCommutingGenerators: return "NonCommutingGenerators";
    case ErrorCode::CovarianceMismatch: return "CovarianceMismatch";
    case ErrorCode::BranchDegenerate: return "BranchDegenerate";
    case ErrorCode::ProjectorsTooFar: return "ProjectorsTooFar";
    case ErrorCode::SmoothingGramSingular: return "SmoothingGramSingular";
    case ErrorCode::NearDependent: return "NearDependent";
    case ErrorCode::ReprojectionSingular: return "ReprojectionSingular";
    case ErrorCode::PlaquetteTooCoarse: return "PlaquetteTooCoarse";
    case ErrorCode::SupercellTooSmall: return "SupercellTooSmall";
    case ErrorCode::InsufficientSupport: return "InsufficientSupport";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::TruncationNotInjective: return "TruncationNotInjective";
    case ErrorCode::GramTooSmall: return "GramTooSmall";
    case ErrorCode::TopologicalObstruction: return "TopologicalObstruction";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code decides the CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace wd
