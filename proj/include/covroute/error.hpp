#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace covroute {

enum class ErrorCode {
  DuplicateId,
  CoLocatedEntities,
  MissingGainEntry,
  NonPositiveNoise,
  SourceEqualsDest,
  InvalidArgument,
  NonPositiveBudget,
  UnusableLink,
  NoFeasiblePath,
  InstanceTooLarge,
  PlacementInfeasible,
  InvalidPlan,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this exception; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace covroute
