#include "phyto/error.hpp"

namespace phyto {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileMissing: return "FileMissing";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::EmptyRecording: return "EmptyRecording";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::AlreadyConverted: return "AlreadyConverted";
    case ErrorCode::NotConverted: return "NotConverted";
    case ErrorCode::EmptyAfterClipping: return "EmptyAfterClipping";
    case ErrorCode::WindowLargerThanSeries: return "WindowLargerThanSeries";
    case ErrorCode::UpsamplingRequested: return "UpsamplingRequested";
    case ErrorCode::InsufficientCoverage: return "InsufficientCoverage";
    case ErrorCode::SliceTooShort: return "SliceTooShort";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NoCommonExpositions: return "NoCommonExpositions";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::AllColumnsConstant: return "AllColumnsConstant";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::NonFiniteFeatures: return "NonFiniteFeatures";
    case ErrorCode::EmptyAfterPreprocessing: return "EmptyAfterPreprocessing";
    case ErrorCode::ColumnMismatch: return "ColumnMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::NoValidConfiguration: return "NoValidConfiguration";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::SingleClassLabels: return "SingleClassLabels";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::GridExceedsData: return "GridExceedsData";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace phyto
