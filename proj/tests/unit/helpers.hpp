#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "phyto/feature_matrix.hpp"
#include "phyto/ingest.hpp"

namespace testing {

inline phyto::TimeSeriesRecording make_recording(const std::vector<double>& values, double rate, double t0 = 0.0,
                                                 phyto::Unit unit = phyto::Unit::Millivolt) {
  phyto::TimeSeriesRecording rec;
  rec.channel_id = "leaf";
  rec.nominal_rate = rate;
  rec.unit = unit;
  rec.values = values;
  for (std::size_t i = 0; i < values.size(); ++i) rec.timestamps.push_back(t0 + static_cast<double>(i) / rate);
  return rec;
}

inline std::vector<double> random_series(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> out(n);
  for (auto& v : out) v = normal(rng);
  return out;
}

/// Balanced two-class matrix; column 0 decides the label, the rest is noise.
inline phyto::FeatureMatrix separable_matrix(std::size_t n, std::size_t cols, std::uint64_t seed,
                                             double margin = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  phyto::FeatureMatrix m;
  m.values = phyto::Matrix(n, cols);
  for (std::size_t c = 0; c < cols; ++c) m.column_names.push_back("f" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    m.labels.push_back(label);
    m.row_ids.push_back("r" + std::to_string(i));
    for (std::size_t c = 0; c < cols; ++c) m.values(i, c) = normal(rng);
    const double mag = margin + std::abs(normal(rng));
    m.values(i, 0) = label == 1 ? mag : -mag;
  }
  return m;
}

inline bool close_rel(double a, double b, double rel = 1e-9, double abs_floor = 1e-9) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace testing
