#include "phyto/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "phyto/error.hpp"
#include "phyto/parallel.hpp"
#include "phyto/random.hpp"

namespace phyto {

namespace {

double unit_shape(const SynthConfig& cfg, double t) {
  if (t < 0.0) return 0.0;
  return (1.0 - std::exp(-t / cfg.response_rise)) * std::exp(-t / cfg.response_decay);
}

struct PlantParams {
  double leaf_offset = 0.0;
  double stem_offset = 0.0;
  double drift_phase = 0.0;
  double amplitude = 0.0;
};

PlantParams plant_params(const SynthConfig& cfg, std::size_t plant) {
  Rng rng(derive_seed(derive_seed(cfg.seed, "plant"), plant));
  std::normal_distribution<double> normal(0.0, 1.0);
  PlantParams p;
  p.leaf_offset = cfg.offset_spread * normal(rng);
  p.stem_offset = cfg.offset_spread * normal(rng);
  p.drift_phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  p.amplitude = std::max(0.0, cfg.response_amplitude * (1.0 + cfg.amplitude_jitter * normal(rng)));
  return p;
}

std::string exposition_name(const SynthConfig& cfg, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "plant%zu_exp%02zu", index / cfg.expositions_per_plant + 1,
                index % cfg.expositions_per_plant + 1);
  return buf;
}

TimeSeriesRecording make_channel(const SynthConfig& cfg, const std::string& channel, double onset, double offset_mv,
                                 double drift_phase, double amplitude, Rng& rng) {
  const auto n = static_cast<std::size_t>(std::llround((cfg.lead_time + cfg.tail_time) * cfg.sampling_rate));
  const double dt = 1.0 / cfg.sampling_rate;
  const double start = onset - cfg.lead_time;
  const double decay = std::exp(-dt / cfg.walk_time_constant);
  const double innovation = cfg.walk_std * std::sqrt(1.0 - decay * decay);
  std::normal_distribution<double> normal(0.0, 1.0);

  TimeSeriesRecording rec;
  rec.channel_id = channel;
  rec.nominal_rate = cfg.sampling_rate;
  rec.unit = Unit::Raw;
  rec.timestamps.resize(n);
  rec.values.resize(n);
  double walk = cfg.walk_std * normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    // Whole microseconds keep the written timestamps exact.
    const double t = start + std::round(static_cast<double>(i) * dt * 1e6) / 1e6;
    walk = decay * walk + innovation * normal(rng);
    double mv = offset_mv + walk + cfg.noise_std * normal(rng) +
                cfg.drift_amplitude * std::sin(2.0 * std::numbers::pi * t / cfg.drift_period + drift_phase);
    if (t >= onset) mv += cfg.response_strength * amplitude * unit_shape(cfg, t - onset);
    rec.timestamps[i] = t;
    rec.values[i] = std::round(mv / cfg.gain);
  }
  return rec;
}

void write_recording(const std::filesystem::path& path, const TimeSeriesRecording& rec) {
  std::string text = "timestamp,value\n";
  text.reserve(rec.size() * 28 + 16);
  char buf[64];
  for (std::size_t i = 0; i < rec.size(); ++i) {
    auto r = std::to_chars(buf, buf + sizeof buf, rec.timestamps[i], std::chars_format::fixed, 6);
    *r.ptr++ = ',';
    r = std::to_chars(r.ptr, buf + sizeof buf, static_cast<long long>(rec.values[i]));
    *r.ptr++ = '\n';
    text.append(buf, r.ptr);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileMissing, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace

void SynthConfig::validate() const {
  const double magnitudes[] = {drift_amplitude, drift_period,      offset_spread,  walk_std,
                               noise_std,       response_amplitude, amplitude_jitter, leaf_response_ratio,
                               lead_time,       tail_time};
  for (double m : magnitudes) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error(ErrorCode::InvalidConfig, "magnitudes must be finite and >= 0");
  }
  if (n_plants < 1 || expositions_per_plant < 1) throw Error(ErrorCode::InvalidConfig, "need at least one exposition");
  if (!(sampling_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "sampling rate must be > 0");
  if (!(walk_time_constant > 0.0)) throw Error(ErrorCode::InvalidConfig, "walk time constant must be > 0");
  if (!(response_rise > 0.0) || !(response_decay > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "response time constants must be > 0");
  }
  if (!(response_strength >= 0.0 && response_strength <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "response strength must be in [0, 1]");
  }
  if (!(gain > 0.0)) throw Error(ErrorCode::InvalidConfig, "gain must be > 0");
  if (lead_time + tail_time < 1800.0) throw Error(ErrorCode::InvalidConfig, "recordings must span at least 30 minutes");
  if (exposition_spacing < lead_time + tail_time) throw Error(ErrorCode::InvalidConfig, "expositions overlap");
}

std::size_t exposition_count(const SynthConfig& cfg) { return cfg.n_plants * cfg.expositions_per_plant; }

double response_shape(const SynthConfig& cfg, double t) { return cfg.response_amplitude * unit_shape(cfg, t); }

SyntheticExposition generate_exposition(const SynthConfig& cfg, std::size_t index) {
  cfg.validate();
  if (index >= exposition_count(cfg)) throw Error(ErrorCode::InvalidConfig, "exposition index out of range");
  const std::size_t plant = index / cfg.expositions_per_plant;
  const auto params = plant_params(cfg, plant);
  const double onset = cfg.start_epoch + cfg.lead_time + static_cast<double>(index) * cfg.exposition_spacing;

  SyntheticExposition out;
  auto& m = out.manifest;
  m.plant_id = "plant" + std::to_string(plant + 1);
  m.exposition_id = exposition_name(cfg, index);
  m.stimulus_onset = onset;
  m.stimulus_duration = 600.0;
  m.channels = {{"leaf", m.exposition_id + "_leaf.csv"}, {"stem", m.exposition_id + "_stem.csv"}};
  m.gain = cfg.gain;
  m.offset = 0.0;
  m.nominal_rate = cfg.sampling_rate;

  Rng leaf_rng(derive_seed(derive_seed(cfg.seed, "leaf"), index));
  Rng stem_rng(derive_seed(derive_seed(cfg.seed, "stem"), index));
  out.leaf = make_channel(cfg, "leaf", onset, params.leaf_offset, params.drift_phase, params.amplitude, leaf_rng);
  out.stem = make_channel(cfg, "stem", onset, params.stem_offset, params.drift_phase,
                          params.amplitude / cfg.leaf_response_ratio, stem_rng);
  return out;
}

std::vector<std::filesystem::path> write_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto dir = out_dir / "expositions";
  std::filesystem::create_directories(dir);
  const std::size_t n = exposition_count(cfg);
  std::vector<std::filesystem::path> manifests(n);
  parallel_for(n, [&](std::size_t i) {
    const auto expo = generate_exposition(cfg, i);
    write_recording(dir / expo.manifest.channels.at("leaf"), expo.leaf);
    write_recording(dir / expo.manifest.channels.at("stem"), expo.stem);
    manifests[i] = dir / (expo.manifest.exposition_id + ".json");
    std::ofstream out(manifests[i], std::ios::binary);
    out << manifest_to_json(expo.manifest);
  });
  return manifests;
}

std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dataset_dir) {
  auto dir = dataset_dir / "expositions";
  if (!std::filesystem::is_directory(dir)) dir = dataset_dir;
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::FileMissing, dataset_dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace phyto
