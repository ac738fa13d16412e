#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "phyto/ingest.hpp"

namespace phyto {

/// Synthetic ozone-exposition experiment. Magnitudes are in millivolt,
/// times in seconds.
struct SynthConfig {
  std::size_t n_plants = 4;
  std::size_t expositions_per_plant = 20;
  double sampling_rate = 300.0;
  double drift_amplitude = 0.2;
  double drift_period = 86400.0;
  double offset_spread = 10.0;
  double walk_std = 1.0;               // stationary std of the mean-reverting walk
  double walk_time_constant = 60.0;    // reversion time of the walk
  double noise_std = 2.0;
  double response_amplitude = 8.0;
  double response_rise = 10.0;
  double response_decay = 60.0;
  double amplitude_jitter = 0.25;      // relative per-plant spread of the amplitude
  double leaf_response_ratio = 1.5;
  double response_strength = 1.0;
  double gain = 0.001;                 // mV per raw count
  double lead_time = 1260.0;           // recording start before onset
  double tail_time = 660.0;            // recording end after onset
  double exposition_spacing = 9000.0;
  double start_epoch = 1700000000.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticExposition {
  ExpositionManifest manifest;
  TimeSeriesRecording leaf;  // raw counts
  TimeSeriesRecording stem;
};

/// Expositions are numbered plant-major: index = plant * expositions_per_plant + e.
std::size_t exposition_count(const SynthConfig& cfg);
SyntheticExposition generate_exposition(const SynthConfig& cfg, std::size_t index);

/// Noise-free response added to the leaf channel at `t` seconds after onset,
/// before per-plant jitter.
double response_shape(const SynthConfig& cfg, double t);

/// Writes `expositions/<id>.json` plus one `timestamp,value` CSV per channel.
/// Returns the manifest paths in generation order.
std::vector<std::filesystem::path> write_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

/// Manifests of a dataset directory written by write_dataset, sorted by path.
std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dataset_dir);

}  // namespace phyto
