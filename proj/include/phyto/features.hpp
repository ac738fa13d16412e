#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phyto/ingest.hpp"

namespace phyto {

enum class FeatureFamily {
  Moments,
  EnergyChange,
  CountsRuns,
  Autocorrelation,
  Spectral,
  Distributional,
  Trend,
};

struct FeatureDescriptor {
  std::string name;
  FeatureFamily family;
  std::vector<std::pair<std::string, double>> parameters;
};

/// Fixed, ordered feature catalog (71 entries, first entry `mean`).
const std::vector<FeatureDescriptor>& catalog();
std::vector<std::string> catalog_names();

struct FeatureVector {
  std::vector<double> values;  // aligned to catalog()
  std::string exposition_id;
  std::string channel_id;
  bool subtracted = false;
};

inline constexpr std::size_t kMinSliceLength = 32;

/// Computes every catalog feature of one slice. Degenerate statistics
/// (constant slices) are mapped to 0 so the vector is always finite.
FeatureVector extract(std::span<const double> slice, std::size_t min_length = kMinSliceLength);

/// extract(stimulus or prestimulus) - extract(background), element-wise.
FeatureVector extract_with_background(const SliceTriple& triple, bool use_stimulus,
                                      std::size_t min_length = kMinSliceLength);

}  // namespace phyto
