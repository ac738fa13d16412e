#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "phyto/matrix.hpp"

namespace phyto {

enum class Provenance { Leaf, Stem, Combined };

std::string_view to_string(Provenance p);

/// Rows are samples (one per exposition window), columns are named features.
///
/// Row ids are `<exposition_id>:stimulus` or `<exposition_id>:prestimulus`
/// when built by the extraction pipeline; any unique string is accepted.
struct FeatureMatrix {
  std::vector<std::string> row_ids;
  Labels labels;
  std::vector<std::string> column_names;
  Matrix values;
  Provenance provenance = Provenance::Leaf;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return column_names.size(); }

  void check() const;
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  FeatureMatrix select_columns(std::span<const std::size_t> indices) const;
  FeatureMatrix select_columns(const std::vector<std::string>& names) const;
  std::size_t column_index(const std::string& name) const;
};

/// Row id suffixes used for the two samples of one exposition.
inline constexpr std::string_view kStimulusSuffix = ":stimulus";
inline constexpr std::string_view kPrestimulusSuffix = ":prestimulus";
std::string exposition_of(const std::string& row_id);

/// Group index per row (rows sharing an exposition share a group), numbered
/// in order of first appearance.
using Groups = std::vector<std::size_t>;
Groups groups_of(const FeatureMatrix& m);

struct ConstantRemoval {
  FeatureMatrix matrix;
  std::vector<std::string> dropped;
};

/// Drops columns whose sample variance is exactly zero.
ConstantRemoval remove_constant(const FeatureMatrix& m);

/// Joins leaf and stem columns (prefixed `leaf__`/`stem__`) over the common
/// rows in leaf order, then removes constant columns.
FeatureMatrix combine_channels(const FeatureMatrix& leaf, const FeatureMatrix& stem);

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m);
void save_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(std::istream& in, Provenance provenance = Provenance::Leaf);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path, Provenance provenance = Provenance::Leaf);

}  // namespace phyto
