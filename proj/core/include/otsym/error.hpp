#pragma once

#include <stdexcept>
#include <string>

namespace otsym {

enum class ErrorCode {
  DimensionMismatch,
  Domain,
  SphericalZeroVector,
  InvalidGroup,
  IncompatibleERD,
  InvalidReference,
  NonFiniteCost,
  DuplicateNorms,
  TooLarge,
  NotSPD,
  SingularERD,
  SingularCovariance,
  TooFewObservations,
  UnknownScenario,
  EmptyGrid,
  Parse,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace otsym
