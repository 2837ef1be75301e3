#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coloc {

enum class ErrorCode {
  FileNotFound,
  UnsupportedFormat,
  MinimumSizeViolated,
  InvalidMap,
  DegenerateMap,
  EmptyMask,
  EmptyList,
  DimensionMismatch,
  InfeasibleConstraints,
  DegenerateSaliency,
  DegenerateCosaliency,
  TooFewImages,
  MissingMap,
  MalformedBoxesFile,
  NoGroundTruth,
  EmptyResults,
  WriteFailure,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::MinimumSizeViolated: return "MinimumSizeViolated";
    case ErrorCode::InvalidMap: return "InvalidMap";
    case ErrorCode::DegenerateMap: return "DegenerateMap";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InfeasibleConstraints: return "InfeasibleConstraints";
    case ErrorCode::DegenerateSaliency: return "DegenerateSaliency";
    case ErrorCode::DegenerateCosaliency: return "DegenerateCosaliency";
    case ErrorCode::TooFewImages: return "TooFewImages";
    case ErrorCode::MissingMap: return "MissingMap";
    case ErrorCode::MalformedBoxesFile: return "MalformedBoxesFile";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::EmptyResults: return "EmptyResults";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code. what() reads
/// "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coloc
