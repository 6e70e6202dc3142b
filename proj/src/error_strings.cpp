#include "stereoprop/error.hpp"

namespace stereoprop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::ZeroScale: return "ZeroScale";
    case ErrorCode::UnsupportedChannelCount: return "UnsupportedChannelCount";
    case ErrorCode::NotSixteenBit: return "NotSixteenBit";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::NegativeDisparity: return "NegativeDisparity";
    case ErrorCode::AllInvalidColumn: return "AllInvalidColumn";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::DegenerateSum: return "DegenerateSum";
    case ErrorCode::BadChannelCount: return "BadChannelCount";
    case ErrorCode::EmptyValidSet: return "EmptyValidSet";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace stereoprop
