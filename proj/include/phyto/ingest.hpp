#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phyto/error.hpp"

namespace phyto {

enum class Unit { Raw, Millivolt };

/// One channel of electric differential potential samples.
///
/// Downsampled recordings additionally carry, per output sample, the number
/// of raw samples that fell into its bucket (`support`) together with the
/// raw rate (`source_rate`); coverage checks are computed from those.
struct TimeSeriesRecording {
  std::string channel_id;
  std::vector<double> timestamps;  // seconds since epoch
  std::vector<double> values;
  double nominal_rate = 0.0;  // Hz
  Unit unit = Unit::Raw;
  std::size_t dropped_rows = 0;
  std::vector<std::uint32_t> support;
  double source_rate = 0.0;

  std::size_t size() const noexcept { return values.size(); }
};

struct ExpositionManifest {
  std::string plant_id;
  std::string exposition_id;
  double stimulus_onset = 0.0;
  double stimulus_duration = 600.0;
  std::map<std::string, std::string> channels;  // channel id -> recording file
  double gain = 1.0;                            // mV per count
  double offset = 0.0;                          // mV
  std::optional<double> nominal_rate;           // estimated from timestamps when absent

  void validate() const;
};

ExpositionManifest parse_manifest(const std::string& json_text);
ExpositionManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const ExpositionManifest& manifest);

/// Parses the `timestamp,value` CSV format. Rows that fail to parse are
/// dropped and counted in `dropped_rows`.
TimeSeriesRecording parse_recording(std::istream& in, const std::string& channel_id,
                                    std::optional<double> nominal_rate = std::nullopt);
TimeSeriesRecording load_recording(const std::filesystem::path& path,
                                   const ExpositionManifest& manifest,
                                   const std::string& channel_id);

TimeSeriesRecording to_millivolts(const TimeSeriesRecording& rec, double gain, double offset);

struct ClipResult {
  TimeSeriesRecording recording;
  std::size_t removed = 0;
};

/// Removes (does not clamp) samples whose magnitude exceeds limit_mv.
ClipResult clip_invalid(const TimeSeriesRecording& rec, double limit_mv = 200.0);

/// Trailing rolling median; the first window-1 outputs use the available prefix.
TimeSeriesRecording rolling_median(const TimeSeriesRecording& rec, std::size_t window = 10);

/// Bucket-mean downsampling; empty buckets are healed by interpolation.
TimeSeriesRecording downsample(const TimeSeriesRecording& rec, double target_rate = 2.0);

struct WindowCoverage {
  double span_fraction = 0.0;  // portion of the window inside the recording
  double raw_fraction = 0.0;   // raw samples present / raw samples expected
};

struct SliceTriple {
  std::vector<double> stimulus;
  std::vector<double> prestimulus;
  std::vector<double> background;
  double rate = 0.0;
  std::string channel_id;
  std::string exposition_id;
  WindowCoverage stimulus_coverage;
  WindowCoverage prestimulus_coverage;
  WindowCoverage background_coverage;
};

/// Raised by slice_exposition when a window is not spanned by the recording.
class CoverageError : public Error {
 public:
  CoverageError(std::vector<std::string> windows, const std::string& detail)
      : Error(ErrorCode::InsufficientCoverage, detail), windows_(std::move(windows)) {}
  const std::vector<std::string>& windows() const noexcept { return windows_; }

 private:
  std::vector<std::string> windows_;
};

/// Cuts background [onset-2D, onset-D), prestimulus [onset-D, onset) and
/// stimulus [onset, onset+D) windows out of a downsampled recording.
SliceTriple slice_exposition(const TimeSeriesRecording& rec, const ExpositionManifest& manifest);

/// Rejects the triple iff any window had less than min_coverage of its
/// expected raw samples.
bool validate_exposition(const SliceTriple& triple, double min_coverage = 0.5);

struct PreprocessConfig {
  double clip_limit_mv = 200.0;
  std::size_t median_window = 10;
  double target_rate = 2.0;
};

/// to_millivolts -> clip_invalid -> rolling_median -> downsample.
TimeSeriesRecording preprocess(const TimeSeriesRecording& raw, const ExpositionManifest& manifest,
                               const PreprocessConfig& cfg = {});

}  // namespace phyto
