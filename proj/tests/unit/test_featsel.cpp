#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "phyto/error.hpp"
#include "phyto/featsel.hpp"

using namespace phyto;

namespace {

/// Columns 2 and 6 carry the label jointly; the rest is noise.
FeatureMatrix two_informative(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix m;
  m.values = Matrix(n, 10);
  for (int c = 0; c < 10; ++c) m.column_names.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    m.labels.push_back(label);
    m.row_ids.push_back("s" + std::to_string(i));
    for (int c = 0; c < 10; ++c) m.values(i, c) = normal(rng);
    const double shift = label == 1 ? 1.2 : -1.2;
    m.values(i, 2) += shift;
    m.values(i, 6) += shift;
  }
  return m;
}

PipelineSpec logistic() { return PipelineSpec{NoPreprocessing{}, Logistic{}, 0}; }

}  // namespace

TEST_CASE("beam schedule parsing and widths") {
  const auto def = BeamSchedule::default_schedule();
  CHECK(def.to_string() == "40:10,100:5,inf:3");
  CHECK(BeamSchedule::parse("40:10,100:5,inf:3").to_string() == def.to_string());
  CHECK(def.width_for(1) == 10);
  CHECK(def.width_for(40) == 10);
  CHECK(def.width_for(41) == 5);
  CHECK(def.width_for(100) == 5);
  CHECK(def.width_for(101) == 3);
  CHECK(def.width_for(5000) == 3);
  for (const char* bad : {"", "40:0", "40:10,30:5", "inf:3,40:2", "x:1", "40"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(BeamSchedule::parse(bad).validate(), Error);
  }
}

TEST_CASE("forward selection finds the informative pair") {
  const auto m = two_informative(80, 51);
  SelectionConfig cfg;
  cfg.n_runs = 20;
  cfg.seed = 3;
  cfg.max_rounds = 3;
  const auto trace = forward_select(m, logistic(), BeamSchedule::parse("inf:4"), cfg);
  REQUIRE(trace.rounds.size() == 3);
  const auto& first = trace.rounds[0].kept.front().features;
  CHECK((first[0] == 2 || first[0] == 6));
  CHECK(trace.rounds[0].n_candidates == 10);

  // Exhaustive pair oracle on the same splits.
  const auto splits = round_splits(m.labels, cfg, 2, groups_of(m));
  double best = -1.0;
  std::vector<std::size_t> best_pair;
  for (std::size_t a = 0; a < 10; ++a) {
    for (std::size_t b = a + 1; b < 10; ++b) {
      const auto s = score_subset(logistic(), m.values, m.labels, {a, b}, splits);
      if (s.mean_roc_auc > best) {
        best = s.mean_roc_auc;
        best_pair = {a, b};
      }
    }
  }
  CHECK(best_pair == std::vector<std::size_t>{2, 6});
  CHECK(trace.rounds[1].kept.front().features == best_pair);
  CHECK(trace.rounds[1].kept.front().mean_roc_auc == best);
}

TEST_CASE("trace invariants") {
  const auto m = testing::separable_matrix(40, 7, 52, 0.1);
  SelectionConfig cfg;
  cfg.n_runs = 5;
  const auto schedule = BeamSchedule::parse("2:3,4:2,inf:1");
  const auto trace = forward_select(m, PipelineSpec{NoPreprocessing{}, Knn{}, 0}, schedule, cfg);
  REQUIRE(trace.rounds.size() == 7);
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const auto& round = trace.rounds[k];
    CHECK(round.size == k + 1);
    CHECK(round.kept.size() == std::min(schedule.width_for(round.size), round.n_candidates));
    for (std::size_t j = 0; j < round.kept.size(); ++j) {
      CHECK(round.kept[j].features.size() == round.size);
      CHECK(std::is_sorted(round.kept[j].features.begin(), round.kept[j].features.end()));
      if (j > 0) CHECK(round.kept[j - 1].mean_roc_auc >= round.kept[j].mean_roc_auc);
    }
    if (k > 0) {
      // Every kept set extends some set kept in the previous round.
      for (const auto& s : round.kept) {
        bool extends = false;
        for (const auto& parent : trace.rounds[k - 1].kept) {
          extends |= std::includes(s.features.begin(), s.features.end(), parent.features.begin(), parent.features.end());
        }
        CHECK(extends);
      }
    }
  }
  CHECK(trace.rounds.back().n_candidates == 1);

  const auto best = best_subset(trace);
  const auto curve = running_best_curve(trace);
  double max_score = -1.0;
  for (const auto& r : trace.rounds) {
    for (const auto& s : r.kept) max_score = std::max(max_score, s.mean_roc_auc);
  }
  CHECK(best.mean_roc_auc == max_score);
  CHECK(best.size == best.features.size());
  CHECK(best.names.size() == best.size);
  CHECK(curve.back().running_max == max_score);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].running_max >= curve[i - 1].running_max);

  std::ostringstream a, b;
  write_trace_csv(a, trace);
  write_trace_csv(b, forward_select(m, PipelineSpec{NoPreprocessing{}, Knn{}, 0}, schedule, cfg));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("size,rank,feature_names,mean_roc_auc,std_roc_auc\n", 0) == 0);
}

TEST_CASE("max_rounds caps the trace and a single column gives one round") {
  const auto m = testing::separable_matrix(30, 6, 53);
  SelectionConfig cfg;
  cfg.n_runs = 3;
  cfg.max_rounds = 2;
  CHECK(forward_select(m, logistic(), BeamSchedule::default_schedule(), cfg).rounds.size() == 2);
  const std::vector<std::size_t> first{0};
  const auto single = forward_select(m.select_columns(first), logistic(), BeamSchedule::default_schedule(),
                                     SelectionConfig{3, 0.8, 0, std::nullopt});
  CHECK(single.rounds.size() == 1);
  CHECK(best_subset(single).names == std::vector<std::string>{"f0"});
}

TEST_CASE("empty trace is rejected") {
  SelectionTrace empty;
  CHECK_THROWS_AS(best_subset(empty), Error);
  CHECK_THROWS_AS(running_best_curve(empty), Error);
}
