#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "phyto/feature_matrix.hpp"
#include "phyto/ingest.hpp"

namespace phyto {

struct ExtractConfig {
  PreprocessConfig preprocess;
  double min_coverage = 0.5;
};

/// Per-channel outcome of preprocessing and slicing one exposition.
struct ExpositionResult {
  ExpositionManifest manifest;
  std::map<std::string, SliceTriple> accepted;  // channel -> slices
  std::map<std::string, std::string> rejected;  // channel -> reason
};

/// Coverage failures become rejections; every other error propagates.
ExpositionResult process_recordings(const ExpositionManifest& manifest,
                                    const std::map<std::string, TimeSeriesRecording>& raw,
                                    const ExtractConfig& cfg = {});
/// Channel files are resolved relative to the manifest's directory.
ExpositionResult process_exposition(const std::filesystem::path& manifest_path, const ExtractConfig& cfg = {});

/// Two rows per accepted exposition (stimulus label 1, prestimulus label 0),
/// background-subtracted, constant columns removed.
FeatureMatrix channel_matrix(const std::vector<ExpositionResult>& results, const std::string& channel,
                             Provenance provenance);

struct DatasetMatrices {
  FeatureMatrix leaf;
  FeatureMatrix stem;
  FeatureMatrix combined;
};
DatasetMatrices build_matrices(const std::vector<ExpositionResult>& results);

/// Exposition-level analysis/test assignment; both samples of an exposition
/// land on the same side, so the label balance is preserved.
struct DatasetSplit {
  std::set<std::string> analysis;
  std::set<std::string> test;
};
DatasetSplit split_expositions(const std::vector<std::string>& exposition_ids, double analysis_ratio,
                               std::uint64_t seed);

/// Rows of `m` whose exposition is in `expositions`, in original order.
FeatureMatrix rows_of(const FeatureMatrix& m, const std::set<std::string>& expositions);

}  // namespace phyto
