#include "ieval/errors.hpp"

namespace ieval {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedName: return "MalformedName";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::ChannelError: return "ChannelError";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyInstrument: return "EmptyInstrument";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DegenerateBands: return "DegenerateBands";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::AllUnvoiced: return "AllUnvoiced";
    case ErrorCode::AliasedHarmonics: return "AliasedHarmonics";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string context)
    : std::runtime_error(context.empty() ? message : message + " [" + context + "]"),
      code_(code),
      context_(std::move(context)) {}

}  // namespace ieval
