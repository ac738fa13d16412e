#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "phyto/datagen.hpp"
#include "phyto/error.hpp"
#include "phyto/eval.hpp"
#include "phyto/workflow.hpp"

using namespace phyto;
namespace fs = std::filesystem;

namespace {

SynthConfig small_config(double strength = 1.0) {
  SynthConfig cfg;
  cfg.n_plants = 2;
  cfg.expositions_per_plant = 4;
  cfg.sampling_rate = 10.0;
  cfg.response_strength = strength;
  cfg.seed = 11;
  return cfg;
}

std::vector<ExpositionResult> process_all(const SynthConfig& cfg) {
  std::vector<ExpositionResult> out;
  for (std::size_t i = 0; i < exposition_count(cfg); ++i) {
    const auto e = generate_exposition(cfg, i);
    out.push_back(process_recordings(e.manifest, {{"leaf", e.leaf}, {"stem", e.stem}}));
  }
  return out;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(SynthConfig{}.validate());
  auto bad = SynthConfig{};
  bad.response_strength = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.noise_std = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.sampling_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SynthConfig{};
  bad.lead_time = 100.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("response shape follows the double exponential") {
  const SynthConfig cfg;
  CHECK(response_shape(cfg, 0.0) == 0.0);
  CHECK(response_shape(cfg, -5.0) == 0.0);
  const double t = 30.0;
  const double expected = cfg.response_amplitude * (1.0 - std::exp(-t / cfg.response_rise)) * std::exp(-t / cfg.response_decay);
  CHECK(response_shape(cfg, t) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("generation is deterministic and seed dependent") {
  const auto cfg = small_config();
  const auto a = generate_exposition(cfg, 3);
  const auto b = generate_exposition(cfg, 3);
  CHECK(a.leaf.values == b.leaf.values);
  CHECK(a.stem.timestamps == b.stem.timestamps);
  auto other = cfg;
  other.seed = 12;
  CHECK(generate_exposition(other, 3).leaf.values != a.leaf.values);
  CHECK(a.manifest.plant_id == "plant1");
  CHECK(generate_exposition(cfg, 4).manifest.plant_id == "plant2");
  CHECK(a.leaf.timestamps.back() - a.leaf.timestamps.front() >= 1800.0);
}

TEST_CASE("written datasets are byte-identical and round-trip through ingest") {
  TempDir one("phyto_datagen_a"), two("phyto_datagen_b");
  const auto cfg = small_config();
  const auto paths = write_dataset(cfg, one.path);
  write_dataset(cfg, two.path);
  REQUIRE(paths.size() == exposition_count(cfg));
  CHECK(find_manifests(one.path) == paths);
  for (const auto& entry : fs::recursive_directory_iterator(one.path)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), one.path);
    CHECK(slurp(entry.path()) == slurp(two.path / rel));
  }
  for (const auto& p : paths) {
    const auto result = process_exposition(p);
    CHECK(result.rejected.empty());
    CHECK(result.accepted.size() == 2);
  }
}

TEST_CASE("noise-free response raises every stimulus slice above its prestimulus slice") {
  auto cfg = small_config();
  cfg.noise_std = 0.0;
  cfg.walk_std = 0.0;
  cfg.drift_amplitude = 0.0;
  for (const auto& r : process_all(cfg)) {
    for (const auto& [channel, slices] : r.accepted) {
      CAPTURE(channel);
      CHECK(mean(slices.stimulus) > mean(slices.prestimulus));
    }
  }
}

TEST_CASE("plant offsets cancel after background subtraction") {
  auto a = small_config();
  a.noise_std = 0.0;
  auto b = a;
  b.offset_spread = 0.0;
  const auto ra = process_all(a), rb = process_all(b);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const auto& sa = ra[i].accepted.at("leaf");
    const auto& sb = rb[i].accepted.at("leaf");
    CHECK(mean(sa.stimulus) - mean(sa.background) ==
          doctest::Approx(mean(sb.stimulus) - mean(sb.background)).epsilon(1e-3).scale(1.0));
  }
}

TEST_CASE("end-to-end AUC does not decrease with response strength") {
  std::vector<double> aucs;
  for (double strength : {0.0, 0.5, 1.0}) {
    auto cfg = small_config(strength);
    cfg.n_plants = 4;
    cfg.expositions_per_plant = 8;
    const auto m = build_matrices(process_all(cfg)).combined;
    const auto report = repeated_eval(PipelineSpec{UnivariateSelect{10}, Logistic{}, 0}, m, EvalConfig{40, 0.8, 1});
    aucs.push_back(report.roc_auc.mean);
  }
  CAPTURE(aucs[0]);
  CAPTURE(aucs[1]);
  CAPTURE(aucs[2]);
  CHECK(aucs[1] >= aucs[0]);
  CHECK(aucs[2] >= aucs[1]);
  CHECK(aucs[2] > 0.9);
}
