#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stereoprop {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  MalformedHeader,
  TruncatedPayload,
  ZeroScale,
  UnsupportedChannelCount,
  NotSixteenBit,
  DecodeError,
  NegativeDisparity,
  AllInvalidColumn,
  TooSmall,
  DegenerateSum,
  BadChannelCount,
  EmptyValidSet,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stereoprop
