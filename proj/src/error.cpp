#include "hwocr/error.hpp"

namespace hwocr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyGoldLabel: return "EmptyGoldLabel";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::DegenerateBandwidth: return "DegenerateBandwidth";
    case ErrorCode::InvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::InsufficientLabels: return "InsufficientLabels";
    case ErrorCode::InvertedClasses: return "InvertedClasses";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::ProviderProtocolError: return "ProviderProtocolError";
    case ErrorCode::InvalidFixture: return "InvalidFixture";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorrectionFailed: return "CorrectionFailed";
    case ErrorCode::NoCodeBlock: return "NoCodeBlock";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownProgram: return "UnknownProgram";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::UnknownConfig: return "UnknownConfig";
  }
  return "Unknown";
}

}  // namespace hwocr
