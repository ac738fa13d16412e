#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "phyto/automl.hpp"
#include "phyto/error.hpp"

using namespace phyto;

namespace {

std::string report_text(const SearchReport& r) {
  std::ostringstream out;
  write_search_report_csv(out, r);
  write_search_summary_csv(out, r);
  return out.str();
}

}  // namespace

TEST_CASE("metric names") {
  CHECK(parse_metric("roc_auc") == Metric::RocAuc);
  CHECK(parse_metric("accuracy") == Metric::Accuracy);
  CHECK(to_string(Metric::Accuracy) == "accuracy");
  CHECK_THROWS_AS(parse_metric("f1"), Error);
}

TEST_CASE("search without tuning enumerates every default combination") {
  const auto m = testing::separable_matrix(60, 6, 41, 0.3);
  SearchConfig cfg;
  cfg.n_hpo_steps = 0;
  cfg.n_validation_splits = 3;
  cfg.seed = 5;
  const auto report = search(m, cfg);
  REQUIRE(report.log.size() == 30);
  const auto& reg = list_components();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 30; ++i) {
    const auto& entry = report.log[i];
    CHECK(entry.phase == 1);
    CHECK(entry.split_scores.size() == 3);
    CHECK(entry.spec.preprocessor == reg.preprocessors[i / 6]);
    CHECK(entry.spec.classifier == reg.classifiers[i % 6]);
    best = std::max(best, entry.mean_score);
  }
  CHECK(report.best_score == best);
  CHECK(report.log[report.best_index].mean_score == best);
  for (std::size_t i = 0; i < report.best_index; ++i) CHECK(report.log[i].mean_score < best);
  CHECK(report.best_spec == report.log[report.best_index].spec);
  REQUIRE(report.final_pipeline.has_value());
  CHECK(report.final_pipeline->columns() == m.column_names);
  CHECK(report_text(report) == report_text(search(m, cfg)));
}

TEST_CASE("search reaches perfect accuracy on separable data") {
  const auto m = testing::separable_matrix(200, 4, 42);
  SearchConfig cfg;
  cfg.metric = Metric::Accuracy;
  cfg.n_hpo_steps = 5;
  const auto report = search(m, cfg);
  CHECK(report.best_score == 1.0);
}

TEST_CASE("phase two tunes the phase-one winner") {
  const auto m = testing::separable_matrix(50, 5, 43, 0.2);
  SearchConfig cfg;
  cfg.n_hpo_steps = 12;
  cfg.n_validation_splits = 2;
  cfg.seed = 8;
  const auto report = search(m, cfg);
  REQUIRE(report.log.size() == 42);
  const auto& winner = report.log[report.phase1_winner].spec;
  CHECK(report.phase1_winner < 30);
  for (std::size_t i = 30; i < 42; ++i) {
    CHECK(report.log[i].phase == 2);
    CHECK(report.log[i].spec.preprocessor.index() == winner.preprocessor.index());
    CHECK(report.log[i].spec.classifier.index() == winner.classifier.index());
  }
  CHECK(report.best_score >= report.log[report.phase1_winner].mean_score);
}

TEST_CASE("hyperparameter sampling is valid and reproducible") {
  for (std::size_t p = 0; p < 5; ++p) {
    for (std::size_t c = 0; c < 6; ++c) {
      Rng a(7), b(7);
      for (int k = 0; k < 20; ++k) {
        const auto spec = sample_hyperparameters({p, c}, a, 50, 3);
        CHECK(spec == sample_hyperparameters({p, c}, b, 50, 3));
        CHECK_NOTHROW(spec.validate());
        CHECK(spec.preprocessor.index() == p);
        CHECK(spec.classifier.index() == c);
        if (const auto* u = std::get_if<UnivariateSelect>(&spec.preprocessor)) CHECK(u->k <= 50);
      }
    }
  }
  Rng rng(1);
  CHECK_THROWS_AS(sample_hyperparameters({4, 0}, rng, 4), Error);
}

TEST_CASE("failed candidates score negative infinity") {
  Matrix x(12, 2, 1.0);
  Labels y;
  for (int i = 0; i < 12; ++i) {
    y.push_back(i % 2);
    x(i, 1) = i;
  }
  const auto splits = stratified_shuffle_splits(y, 2, 0.8, 0);
  const auto r = evaluate_candidate(PipelineSpec{VarianceThreshold{1e6}, Knn{}, 0}, x, y, splits, Metric::RocAuc);
  CHECK(r.failed);
  CHECK(r.mean_score == -std::numeric_limits<double>::infinity());
  CHECK_FALSE(r.failure.empty());
}

TEST_CASE("search rejects tiny or single-class data") {
  const auto m = testing::separable_matrix(4, 2, 44);
  CHECK_THROWS_AS(search(m, SearchConfig{}), Error);
  SearchConfig bad;
  bad.n_validation_splits = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
