#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ieval {

enum class ErrorCode {
  MalformedName,
  OutOfRange,
  UnsupportedFormat,
  ChannelError,
  CorruptFile,
  IoError,
  EmptyInstrument,
  RateMismatch,
  DuplicateKey,
  TooShort,
  DegenerateBands,
  InvalidConfig,
  NonPositiveFrequency,
  AllUnvoiced,
  AliasedHarmonics,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported through this type. `context`
// names the offending file or sample key when one is known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string context = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace ieval
