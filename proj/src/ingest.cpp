#include "phyto/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "phyto/text.hpp"

namespace phyto {

namespace {

using json = nlohmann::json;

constexpr double kBucketEps = 1e-6;

void check_monotone(const std::vector<double>& ts) {
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i] > ts[i - 1])) {
      throw Error(ErrorCode::NonMonotoneTimestamps,
                  "timestamp at row " + std::to_string(i + 1) + " does not increase");
    }
  }
}

double estimate_rate(const std::vector<double>& ts) {
  if (ts.size() < 2) return 1.0;
  return static_cast<double>(ts.size() - 1) / (ts.back() - ts.front());
}

TimeSeriesRecording with_values(const TimeSeriesRecording& rec, std::vector<double> values) {
  TimeSeriesRecording out;
  out.channel_id = rec.channel_id;
  out.timestamps = rec.timestamps;
  out.values = std::move(values);
  out.nominal_rate = rec.nominal_rate;
  out.unit = rec.unit;
  out.dropped_rows = rec.dropped_rows;
  out.support = rec.support;
  out.source_rate = rec.source_rate;
  return out;
}

double median_of(std::vector<double>& buf) {
  const std::size_t n = buf.size();
  const std::size_t mid = n / 2;
  std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
  const double upper = buf[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(buf.begin(), buf.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace

void ExpositionManifest::validate() const {
  if (!(stimulus_duration > 0.0)) {
    throw Error(ErrorCode::InvalidManifest, exposition_id + ": stimulus_duration must be > 0");
  }
  if (gain == 0.0 || !std::isfinite(gain)) {
    throw Error(ErrorCode::InvalidManifest, exposition_id + ": gain must be non-zero");
  }
  if (!std::isfinite(offset) || !std::isfinite(stimulus_onset)) {
    throw Error(ErrorCode::InvalidManifest, exposition_id + ": non-finite onset or offset");
  }
  if (nominal_rate && !(*nominal_rate > 0.0)) {
    throw Error(ErrorCode::InvalidManifest, exposition_id + ": nominal_rate must be > 0");
  }
}

ExpositionManifest parse_manifest(const std::string& json_text) {
  ExpositionManifest m;
  try {
    const json j = json::parse(json_text);
    m.plant_id = j.at("plant_id").get<std::string>();
    m.exposition_id = j.at("exposition_id").get<std::string>();
    m.stimulus_onset = j.at("stimulus_onset").get<double>();
    m.stimulus_duration = j.value("stimulus_duration", 600.0);
    m.channels = j.at("channels").get<std::map<std::string, std::string>>();
    m.gain = j.at("gain").get<double>();
    m.offset = j.at("offset").get<double>();
    if (j.contains("nominal_rate")) m.nominal_rate = j.at("nominal_rate").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, e.what());
  }
  m.validate();
  return m;
}

ExpositionManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileMissing, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string manifest_to_json(const ExpositionManifest& m) {
  json j;
  j["plant_id"] = m.plant_id;
  j["exposition_id"] = m.exposition_id;
  j["stimulus_onset"] = m.stimulus_onset;
  j["stimulus_duration"] = m.stimulus_duration;
  j["channels"] = m.channels;
  j["gain"] = m.gain;
  j["offset"] = m.offset;
  if (m.nominal_rate) j["nominal_rate"] = *m.nominal_rate;
  return j.dump(2) + "\n";
}

TimeSeriesRecording parse_recording(std::istream& in, const std::string& channel_id,
                                    std::optional<double> nominal_rate) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedHeader, "missing header line");
  std::string_view header = line;
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  auto cols = split(trim(header), ',');
  if (cols.size() != 2 || trim(cols[0]) != "timestamp" || trim(cols[1]) != "value") {
    throw Error(ErrorCode::MalformedHeader, "expected 'timestamp,value', got '" + line + "'");
  }

  TimeSeriesRecording rec;
  rec.channel_id = channel_id;
  rec.unit = Unit::Raw;
  while (std::getline(in, line)) {
    std::string_view row = trim(line);
    if (row.empty()) continue;
    auto comma = row.find(',');
    std::optional<double> ts, value;
    if (comma != std::string_view::npos && row.find(',', comma + 1) == std::string_view::npos) {
      ts = parse_double(row.substr(0, comma));
      value = parse_double(row.substr(comma + 1));
    }
    if (!ts || !value || !std::isfinite(*ts) || !std::isfinite(*value)) {
      ++rec.dropped_rows;
      continue;
    }
    rec.timestamps.push_back(*ts);
    rec.values.push_back(*value);
  }
  if (rec.values.empty()) throw Error(ErrorCode::EmptyRecording, channel_id + ": no valid rows");
  check_monotone(rec.timestamps);
  rec.nominal_rate = nominal_rate.value_or(estimate_rate(rec.timestamps));
  if (!(rec.nominal_rate > 0.0) || !std::isfinite(rec.nominal_rate)) rec.nominal_rate = 1.0;
  return rec;
}

TimeSeriesRecording load_recording(const std::filesystem::path& path,
                                   const ExpositionManifest& manifest,
                                   const std::string& channel_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileMissing, path.string());
  // Reading through a memory buffer is several times faster than getline on the stream.
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_recording(buffer, channel_id, manifest.nominal_rate);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

TimeSeriesRecording to_millivolts(const TimeSeriesRecording& rec, double gain, double offset) {
  if (rec.unit == Unit::Millivolt) {
    throw Error(ErrorCode::AlreadyConverted, rec.channel_id + " is already in millivolt");
  }
  if (gain == 0.0 || !std::isfinite(gain)) throw Error(ErrorCode::InvalidManifest, "gain must be non-zero");
  std::vector<double> values(rec.values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = gain * rec.values[i] + offset;
    if (!std::isfinite(values[i])) throw Error(ErrorCode::NonFiniteInput, "conversion overflow");
  }
  auto out = with_values(rec, std::move(values));
  out.unit = Unit::Millivolt;
  return out;
}

ClipResult clip_invalid(const TimeSeriesRecording& rec, double limit_mv) {
  if (rec.unit != Unit::Millivolt) throw Error(ErrorCode::NotConverted, "clip_invalid expects millivolt");
  ClipResult result;
  auto& out = result.recording;
  out.channel_id = rec.channel_id;
  out.nominal_rate = rec.nominal_rate;
  out.unit = rec.unit;
  out.dropped_rows = rec.dropped_rows;
  out.source_rate = rec.source_rate;
  out.timestamps.reserve(rec.size());
  out.values.reserve(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (std::abs(rec.values[i]) > limit_mv) {
      ++result.removed;
      continue;
    }
    out.timestamps.push_back(rec.timestamps[i]);
    out.values.push_back(rec.values[i]);
    if (!rec.support.empty()) out.support.push_back(rec.support[i]);
  }
  if (out.values.empty()) {
    throw Error(ErrorCode::EmptyAfterClipping,
                rec.channel_id + ": every sample exceeds +-" + format_double(limit_mv) + " mV");
  }
  return result;
}

TimeSeriesRecording rolling_median(const TimeSeriesRecording& rec, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::WindowLargerThanSeries, "window must be >= 1");
  if (window > rec.size()) {
    throw Error(ErrorCode::WindowLargerThanSeries,
                "window " + std::to_string(window) + " exceeds series length " + std::to_string(rec.size()));
  }
  std::vector<double> out(rec.size());
  std::vector<double> buf;
  buf.reserve(window);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const std::size_t start = i + 1 >= window ? i + 1 - window : 0;
    buf.assign(rec.values.begin() + static_cast<std::ptrdiff_t>(start),
               rec.values.begin() + static_cast<std::ptrdiff_t>(i + 1));
    out[i] = median_of(buf);
  }
  return with_values(rec, std::move(out));
}

TimeSeriesRecording downsample(const TimeSeriesRecording& rec, double target_rate) {
  if (!(target_rate > 0.0) || rec.nominal_rate < target_rate) {
    throw Error(ErrorCode::UpsamplingRequested, "target rate " + format_double(target_rate) +
                                                    " Hz exceeds nominal rate " +
                                                    format_double(rec.nominal_rate) + " Hz");
  }
  if (rec.values.empty()) throw Error(ErrorCode::EmptyRecording, rec.channel_id);

  const double t0 = rec.timestamps.front();
  const double duration = rec.timestamps.back() - t0 + 1.0 / rec.nominal_rate;
  const auto n_buckets = static_cast<std::size_t>(std::max(1.0, std::floor(duration * target_rate + kBucketEps)));

  std::vector<double> sums(n_buckets, 0.0);
  std::vector<std::uint32_t> counts(n_buckets, 0);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    auto b = static_cast<std::size_t>(std::floor((rec.timestamps[i] - t0) * target_rate + kBucketEps));
    b = std::min(b, n_buckets - 1);
    sums[b] += rec.values[i];
    counts[b] += 1;
  }

  TimeSeriesRecording out;
  out.channel_id = rec.channel_id;
  out.unit = rec.unit;
  out.nominal_rate = target_rate;
  out.source_rate = rec.nominal_rate;
  out.dropped_rows = rec.dropped_rows;
  out.timestamps.resize(n_buckets);
  out.values.assign(n_buckets, 0.0);
  out.support = counts;

  std::vector<std::size_t> filled;
  for (std::size_t b = 0; b < n_buckets; ++b) {
    out.timestamps[b] = t0 + (static_cast<double>(b) + 0.5) / target_rate;
    if (counts[b] > 0) {
      out.values[b] = sums[b] / counts[b];
      filled.push_back(b);
    }
  }
  // Leading/trailing gaps copy the nearest bucket; interior gaps interpolate.
  for (std::size_t b = 0; b < filled.front(); ++b) out.values[b] = out.values[filled.front()];
  for (std::size_t b = filled.back() + 1; b < n_buckets; ++b) out.values[b] = out.values[filled.back()];
  for (std::size_t k = 0; k + 1 < filled.size(); ++k) {
    const std::size_t lo = filled[k], hi = filled[k + 1];
    for (std::size_t b = lo + 1; b < hi; ++b) {
      const double w = static_cast<double>(b - lo) / static_cast<double>(hi - lo);
      out.values[b] = (1.0 - w) * out.values[lo] + w * out.values[hi];
    }
  }
  return out;
}

SliceTriple slice_exposition(const TimeSeriesRecording& rec, const ExpositionManifest& manifest) {
  manifest.validate();
  if (rec.values.empty()) throw Error(ErrorCode::EmptyRecording, rec.channel_id);
  const double rate = rec.nominal_rate;
  const double duration = manifest.stimulus_duration;
  const auto length = static_cast<std::size_t>(std::llround(duration * rate));
  const double t0 = rec.timestamps.front() - 0.5 / rate;  // start of bucket 0
  const auto n = static_cast<long long>(rec.size());
  const double t_end = t0 + static_cast<double>(n) / rate;
  const double source_rate = rec.source_rate > 0.0 ? rec.source_rate : rate;

  struct Window {
    const char* name;
    double start;
    std::vector<double>* dest;
    WindowCoverage* coverage;
  };
  SliceTriple triple;
  triple.rate = rate;
  triple.channel_id = rec.channel_id;
  triple.exposition_id = manifest.exposition_id;
  const double onset = manifest.stimulus_onset;
  const Window windows[] = {
      {"background", onset - 2.0 * duration, &triple.background, &triple.background_coverage},
      {"prestimulus", onset - duration, &triple.prestimulus, &triple.prestimulus_coverage},
      {"stimulus", onset, &triple.stimulus, &triple.stimulus_coverage},
  };

  std::vector<std::string> missing;
  std::string detail;
  for (const auto& w : windows) {
    const double overlap = std::max(0.0, std::min(w.start + duration, t_end) - std::max(w.start, t0));
    w.coverage->span_fraction = std::min(1.0, overlap / duration);
    const auto first = static_cast<long long>(std::ceil((w.start - t0) * rate - 0.5 - kBucketEps));
    if (first < 0 || first + static_cast<long long>(length) > n) {
      missing.emplace_back(w.name);
      detail += std::string(missing.size() > 1 ? ", " : "") + w.name + " " +
                format_fixed(100.0 * w.coverage->span_fraction, 1) + "% spanned";
      continue;
    }
    const auto begin = static_cast<std::size_t>(first);
    w.dest->assign(rec.values.begin() + static_cast<std::ptrdiff_t>(begin),
                   rec.values.begin() + static_cast<std::ptrdiff_t>(begin + length));
    double raw = 0.0;
    if (rec.support.empty()) {
      raw = static_cast<double>(length) * (source_rate / rate);
    } else {
      for (std::size_t b = begin; b < begin + length; ++b) raw += rec.support[b];
    }
    w.coverage->raw_fraction = raw / (duration * source_rate);
  }
  if (!missing.empty()) {
    throw CoverageError(missing, manifest.exposition_id + "/" + rec.channel_id + ": " + detail);
  }
  return triple;
}

bool validate_exposition(const SliceTriple& triple, double min_coverage) {
  // Tolerate rounding in the raw-sample ratio so that exactly half coverage is accepted.
  constexpr double tol = 1e-9;
  for (const auto* c : {&triple.stimulus_coverage, &triple.prestimulus_coverage, &triple.background_coverage}) {
    if (c->raw_fraction + tol < min_coverage) return false;
  }
  return true;
}

TimeSeriesRecording preprocess(const TimeSeriesRecording& raw, const ExpositionManifest& manifest,
                               const PreprocessConfig& cfg) {
  auto mv = to_millivolts(raw, manifest.gain, manifest.offset);
  auto clipped = clip_invalid(mv, cfg.clip_limit_mv);
  auto smoothed = rolling_median(clipped.recording, cfg.median_window);
  return downsample(smoothed, cfg.target_rate);
}

}  // namespace phyto
