#pragma once

#include <stdexcept>
#include <string>

namespace ildvs {

// Every failure raised by the library derives from Error so callers (the CLI,
// the trial runner) can separate domain failures from programming errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ILDVS_DEFINE_ERROR(Name)                \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what_arg)  \
        : Error(#Name ": " + what_arg) {}       \
  };

ILDVS_DEFINE_ERROR(BehindCamera)
ILDVS_DEFINE_ERROR(NoDetection)
ILDVS_DEFINE_ERROR(LabelNotFound)
ILDVS_DEFINE_ERROR(UnitMismatch)
ILDVS_DEFINE_ERROR(NonPositiveDepth)
ILDVS_DEFINE_ERROR(SingularSystem)
ILDVS_DEFINE_ERROR(DegenerateDirection)
ILDVS_DEFINE_ERROR(SegmentTooLong)
ILDVS_DEFINE_ERROR(WorkspaceViolation)
ILDVS_DEFINE_ERROR(ObjectOutOfView)
ILDVS_DEFINE_ERROR(NoGroundTruth)
ILDVS_DEFINE_ERROR(InvalidArgument)

#undef ILDVS_DEFINE_ERROR

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(const std::string& what_arg, long iteration = -1)
      : Error("NumericalBlowup: " + what_arg +
              (iteration >= 0 ? " (iteration " + std::to_string(iteration) + ")"
                              : std::string())),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// Malformed input file; line is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what_arg, long line)
      : Error("ParseError: line " + std::to_string(line) + ": " + what_arg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace ildvs
