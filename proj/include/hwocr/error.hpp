#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hwocr {

enum class ErrorCode {
  InvalidArgument,
  EmptyGoldLabel,
  EmptyDataset,
  EmptyDocument,
  DegenerateBandwidth,
  InvalidBandwidth,
  InsufficientLabels,
  InvertedClasses,
  InvalidParams,
  ProviderUnavailable,
  ProviderProtocolError,
  InvalidFixture,
  IoError,
  CorrectionFailed,
  NoCodeBlock,
  InvalidManifest,
  InvalidConfig,
  UnknownProgram,
  DuplicateLabel,
  UnknownConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. `code()` is the machine-readable reason; the
/// message carries context (entry names, retry counts, step index).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hwocr
