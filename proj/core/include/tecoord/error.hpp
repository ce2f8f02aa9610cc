#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tecoord {

enum class ErrorCode {
  InvalidArgument,
  ScenarioInvalid,
  BadDimensions,
  NotAPartition,
  DegenerateSupply,
  Infeasible,
  InfeasibleCapacity,
  NotConverged,
  NoPureNash,
  TypeOffSupport,
  ZeroBidSum,
  UnboundedTeam,
  GradientDegenerate,
  NotIncentiveControllable,
  PriorRequired,
  NeedTwoAgents,
  CapacityNotBinding,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.  The code is
/// stable and is what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::NotAPartition: return "NotAPartition";
    case ErrorCode::DegenerateSupply: return "DegenerateSupply";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InfeasibleCapacity: return "InfeasibleCapacity";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NoPureNash: return "NoPureNash";
    case ErrorCode::TypeOffSupport: return "TypeOffSupport";
    case ErrorCode::ZeroBidSum: return "ZeroBidSum";
    case ErrorCode::UnboundedTeam: return "UnboundedTeam";
    case ErrorCode::GradientDegenerate: return "GradientDegenerate";
    case ErrorCode::NotIncentiveControllable: return "NotIncentiveControllable";
    case ErrorCode::PriorRequired: return "PriorRequired";
    case ErrorCode::NeedTwoAgents: return "NeedTwoAgents";
    case ErrorCode::CapacityNotBinding: return "CapacityNotBinding";
  }
  return "Unknown";
}

}  // namespace tecoord
