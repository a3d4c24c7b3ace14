#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voxelastic {

enum class ErrorCode {
  NoStructureFound,
  EmptyStructure,
  DanglingLoad,
  InvalidWorld,
  DegenerateOffset,
  SingularCorrection,
  InvertedElement,
  NonFinite,
  SpecialBlockNotFound,
  InvalidConfig,
  UnknownProperty,
  OutOfRange,
  ParseError,
  IoError,
  Cancelled,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// front ends (CLI exit status, HTTP status) can classify it without parsing
/// the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace voxelastic
