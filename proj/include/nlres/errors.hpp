#pragma once

#include <stdexcept>
#include <string>

namespace nlres {

// Base of every numerical failure raised by the toolkit. The `code()` string is
// stable and goes into machine-readable error records written by the CLI.
class NumericalError : public std::runtime_error {
public:
  NumericalError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

#define NLRES_DEFINE_ERROR(Name)                                               \
  class Name : public NumericalError {                                         \
  public:                                                                      \
    explicit Name(const std::string& what) : NumericalError(#Name, what) {}    \
  }

NLRES_DEFINE_ERROR(StepUnderflow);
NLRES_DEFINE_ERROR(NoConvergence);
NLRES_DEFINE_ERROR(SingularJacobian);
NLRES_DEFINE_ERROR(DegenerateOrbit);
NLRES_DEFINE_ERROR(SeedNotConverged);
NLRES_DEFINE_ERROR(NotApplicable);
NLRES_DEFINE_ERROR(SwitchFailed);
NLRES_DEFINE_ERROR(LostFoldCondition);

#undef NLRES_DEFINE_ERROR

} // namespace nlres
