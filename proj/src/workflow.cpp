#include "phyto/workflow.hpp"

#include <algorithm>
#include <cmath>

#include "phyto/error.hpp"
#include "phyto/features.hpp"
#include "phyto/random.hpp"

namespace phyto {

ExpositionResult process_recordings(const ExpositionManifest& manifest,
                                    const std::map<std::string, TimeSeriesRecording>& raw,
                                    const ExtractConfig& cfg) {
  ExpositionResult result;
  result.manifest = manifest;
  for (const auto& [channel, rec] : raw) {
    try {
      const auto triple = slice_exposition(preprocess(rec, manifest, cfg.preprocess), manifest);
      if (validate_exposition(triple, cfg.min_coverage)) {
        result.accepted.emplace(channel, triple);
      } else {
        result.rejected.emplace(channel, "less than " + std::to_string(cfg.min_coverage) + " of raw samples recorded");
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientCoverage && e.code() != ErrorCode::EmptyAfterClipping) throw;
      result.rejected.emplace(channel, e.what());
    }
  }
  return result;
}

ExpositionResult process_exposition(const std::filesystem::path& manifest_path, const ExtractConfig& cfg) {
  const auto manifest = load_manifest(manifest_path);
  std::map<std::string, TimeSeriesRecording> raw;
  for (const auto& [channel, file] : manifest.channels) {
    raw.emplace(channel, load_recording(manifest_path.parent_path() / file, manifest, channel));
  }
  try {
    return process_recordings(manifest, raw, cfg);
  } catch (const Error& e) {
    throw Error(e.code(), manifest_path.string() + ": " + e.what());
  }
}

FeatureMatrix channel_matrix(const std::vector<ExpositionResult>& results, const std::string& channel,
                             Provenance provenance) {
  FeatureMatrix m;
  m.provenance = provenance;
  m.column_names = catalog_names();
  m.values = Matrix(0, m.column_names.size());
  for (const auto& r : results) {
    const auto it = r.accepted.find(channel);
    if (it == r.accepted.end()) continue;
    const auto& id = r.manifest.exposition_id;
    m.values.append_row(extract_with_background(it->second, true).values);
    m.row_ids.push_back(id + std::string(kStimulusSuffix));
    m.labels.push_back(1);
    m.values.append_row(extract_with_background(it->second, false).values);
    m.row_ids.push_back(id + std::string(kPrestimulusSuffix));
    m.labels.push_back(0);
  }
  if (m.rows() == 0) throw Error(ErrorCode::Empty, "no accepted expositions for channel " + channel);
  return remove_constant(m).matrix;
}

DatasetMatrices build_matrices(const std::vector<ExpositionResult>& results) {
  DatasetMatrices out;
  out.leaf = channel_matrix(results, "leaf", Provenance::Leaf);
  out.stem = channel_matrix(results, "stem", Provenance::Stem);
  out.combined = combine_channels(out.leaf, out.stem);
  return out;
}

DatasetSplit split_expositions(const std::vector<std::string>& exposition_ids, double analysis_ratio,
                               std::uint64_t seed) {
  if (!(analysis_ratio > 0.0 && analysis_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "analysis ratio must be in (0, 1)");
  }
  std::vector<std::string> ids = exposition_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least two expositions to split");
  Rng rng(derive_seed(seed, "analysis_test"));
  std::shuffle(ids.begin(), ids.end(), rng);
  auto n_analysis = static_cast<std::size_t>(std::llround(analysis_ratio * static_cast<double>(ids.size())));
  n_analysis = std::clamp<std::size_t>(n_analysis, 1, ids.size() - 1);
  DatasetSplit split;
  split.analysis.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_analysis));
  split.test.insert(ids.begin() + static_cast<std::ptrdiff_t>(n_analysis), ids.end());
  return split;
}

FeatureMatrix rows_of(const FeatureMatrix& m, const std::set<std::string>& expositions) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m.row_ids.size(); ++i) {
    if (expositions.contains(exposition_of(m.row_ids[i]))) keep.push_back(i);
  }
  return m.select_rows(keep);
}

}  // namespace phyto
