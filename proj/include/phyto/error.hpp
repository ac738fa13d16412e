#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phyto {

enum class ErrorCode {
  FileMissing,
  MalformedHeader,
  EmptyRecording,
  NonMonotoneTimestamps,
  InvalidManifest,
  AlreadyConverted,
  NotConverted,
  EmptyAfterClipping,
  WindowLargerThanSeries,
  UpsamplingRequested,
  InsufficientCoverage,
  SliceTooShort,
  NonFiniteInput,
  NoCommonExpositions,
  LabelMismatch,
  AllColumnsConstant,
  SingleClassTraining,
  NonFiniteFeatures,
  EmptyAfterPreprocessing,
  ColumnMismatch,
  InvalidSpec,
  TooFewSamples,
  DegenerateLabels,
  NoValidConfiguration,
  InvalidSchedule,
  EmptyTrace,
  SingleClassLabels,
  LengthMismatch,
  Empty,
  ClassTooSmall,
  GridExceedsData,
  InvalidConfig,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace phyto
