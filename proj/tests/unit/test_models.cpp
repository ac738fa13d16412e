#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "phyto/error.hpp"
#include "phyto/eval.hpp"
#include "phyto/models.hpp"

using namespace phyto;

namespace {

ErrorCode fit_error(const PipelineSpec& spec, const Matrix& x, const Labels& y) {
  try {
    fit(spec, x, y);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected fit to fail");
  return ErrorCode::ParseError;
}

std::vector<PipelineSpec> all_default_specs(std::uint64_t seed = 0) {
  std::vector<PipelineSpec> out;
  for (const auto& p : list_components().preprocessors) {
    for (const auto& c : list_components().classifiers) out.push_back(PipelineSpec{p, c, seed});
  }
  return out;
}

PipelineSpec with_classifier(Classifier c, Preprocessor p = NoPreprocessing{}) { return PipelineSpec{p, c, 3}; }

}  // namespace

TEST_CASE("registry holds the normative components") {
  const auto& reg = list_components();
  REQUIRE(reg.preprocessors.size() == 5);
  REQUIRE(reg.classifiers.size() == 6);
  CHECK(component_name(reg.preprocessors[0]) == "none");
  CHECK(std::get<VarianceThreshold>(reg.preprocessors[1]).threshold == 0.0);
  CHECK(std::get<UnivariateSelect>(reg.preprocessors[4]).k == 50);
  const auto& knn = std::get<Knn>(reg.classifiers[0]);
  CHECK(knn.k == 5);
  CHECK(knn.weights == KnnWeights::Uniform);
  CHECK_FALSE(std::get<DecisionTree>(reg.classifiers[1]).max_depth.has_value());
  CHECK(std::get<RandomForest>(reg.classifiers[2]).n_trees == 100);
  CHECK(std::get<GradientBoostedTrees>(reg.classifiers[4]).max_bins == 255);
  CHECK(std::get<Logistic>(reg.classifiers[5]).strength == 1.0);
  for (const auto& spec : all_default_specs()) CHECK_NOTHROW(spec.validate());
}

TEST_CASE("pipeline spec text round-trips") {
  for (const auto& spec : all_default_specs(17)) {
    const auto text = spec.to_string();
    CHECK(PipelineSpec::parse(text) == spec);
  }
  const auto spec = PipelineSpec::parse("univariate_select(k=12) + gradient_boosted_trees(n_rounds=80;learning_rate=0.0123456789;max_bins=64;max_depth=4) seed=9");
  CHECK(std::get<UnivariateSelect>(spec.preprocessor).k == 12);
  CHECK(std::get<GradientBoostedTrees>(spec.classifier).learning_rate == 0.0123456789);
  CHECK(spec.seed == 9);
  CHECK(PipelineSpec::parse(spec.to_string()) == spec);
  CHECK_THROWS_AS(PipelineSpec::parse("bogus + knn"), Error);
  CHECK_THROWS_AS(PipelineSpec::parse("none + knn(k=0;weights=uniform)"), Error);
}

TEST_CASE("knn with k=1 memorizes distinct training rows") {
  const auto m = testing::separable_matrix(30, 4, 1);
  const auto model = fit(with_classifier(Knn{1, KnnWeights::Uniform}), m.values, m.labels);
  CHECK(accuracy(model.predict_label(m.values), m.labels) == 1.0);
}

TEST_CASE("knn scores are neighbour fractions") {
  Matrix x(0, 1);
  for (double v : {0.0, 1.0, 2.0, 3.0, 4.0, 100.0, 101.0}) x.append_row(std::vector<double>{v});
  const Labels y{1, 1, 1, 0, 0, 0, 1};
  const auto model = fit(with_classifier(Knn{5, KnnWeights::Uniform}), x, y);
  Matrix q(1, 1, 2.0);
  CHECK(model.predict_score(q)[0] == doctest::Approx(0.6));
}

TEST_CASE("knn label flip maps s to 1 - s") {
  const auto m = testing::separable_matrix(40, 3, 2, 0.1);
  Labels flipped = m.labels;
  for (auto& v : flipped) v = 1 - v;
  const auto a = fit(with_classifier(Knn{5, KnnWeights::Uniform}), m.values, m.labels);
  const auto b = fit(with_classifier(Knn{5, KnnWeights::Uniform}), m.values, flipped);
  const auto probe = testing::separable_matrix(25, 3, 99);
  const auto sa = a.predict_score(probe.values), sb = b.predict_score(probe.values);
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == doctest::Approx(1.0 - sb[i]));
}

TEST_CASE("fit rejects invalid training data") {
  Matrix x(4, 2, 1.0);
  x(0, 0) = 2.0;
  CHECK(fit_error(with_classifier(Knn{}), x, Labels{1, 1, 1, 1}) == ErrorCode::SingleClassTraining);
  const Labels y{0, 1, 0, 1};
  CHECK(fit_error(PipelineSpec{VarianceThreshold{0.0}, Knn{}, 0}, Matrix(4, 3, 7.0), y) ==
        ErrorCode::EmptyAfterPreprocessing);
  Matrix bad = x;
  bad(1, 1) = std::nan("");
  CHECK(fit_error(with_classifier(Knn{}), bad, y) == ErrorCode::NonFiniteFeatures);
}

TEST_CASE("predict checks columns") {
  const auto m = testing::separable_matrix(20, 3, 5);
  const auto model = fit(with_classifier(Logistic{}), m);
  auto other = m;
  other.column_names[1] = "renamed";
  CHECK_THROWS_AS(model.predict_score(other), Error);
  CHECK_THROWS_AS(model.predict_score(Matrix(2, 4)), Error);
}

TEST_CASE("every default pipeline fits, scores in [0, 1] and is deterministic") {
  const auto m = testing::separable_matrix(60, 8, 7, 0.5);
  const auto probe = testing::separable_matrix(30, 8, 8, 0.5);
  for (const auto& spec : all_default_specs(4)) {
    CAPTURE(spec.to_string());
    const auto a = fit(spec, m).predict_score(probe);
    const auto b = fit(spec, m).predict_score(probe);
    CHECK(a == b);
    for (double s : a) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    CHECK(roc_auc(a, probe.labels) > 0.8);
  }
}

TEST_CASE("predict_label thresholds inclusively") {
  CHECK(threshold_scores(std::vector<double>{0.5, 0.49}, 0.5) == Labels{1, 0});
  CHECK(threshold_scores(std::vector<double>{0.0, 0.0}, 0.5) == Labels{0, 0});
  CHECK(threshold_scores(std::vector<double>{0.0, 0.3}, 0.0) == Labels{1, 1});
}

TEST_CASE("predict_label is invariant under a monotone transform of scores and threshold") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(20), t(20);
    for (auto& v : s) v = u(rng);
    const double thr = u(rng);
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(3.0 * s[i]) - 1.0;
    CHECK(threshold_scores(s, thr) == threshold_scores(t, std::exp(3.0 * thr) - 1.0));
  }
}

TEST_CASE("minmax scaler maps training columns onto [0, 1]") {
  auto m = testing::separable_matrix(30, 4, 9);
  for (std::size_t i = 0; i < m.rows(); ++i) m.values(i, 3) = 2.0;
  const auto model = fit(PipelineSpec{MinMaxScaler{}, Knn{}, 0}, m.values, m.labels);
  const auto t = model.transform(m.values);
  for (std::size_t c = 0; c < 3; ++c) {
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      lo = std::min(lo, t(i, c));
      hi = std::max(hi, t(i, c));
    }
    CHECK(lo == 0.0);
    CHECK(hi == doctest::Approx(1.0));
  }
  for (std::size_t i = 0; i < t.rows(); ++i) CHECK(t(i, 3) == 0.0);
}

TEST_CASE("l2 normalizer yields unit rows and keeps zero rows") {
  auto m = testing::separable_matrix(20, 5, 10);
  for (std::size_t c = 0; c < 5; ++c) m.values(4, c) = 0.0;
  const auto t = fit(PipelineSpec{L2Normalizer{}, Knn{}, 0}, m.values, m.labels).transform(m.values);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    double norm = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) norm += t(i, c) * t(i, c);
    CHECK(std::sqrt(norm) == doctest::Approx(i == 4 ? 0.0 : 1.0));
  }
}

TEST_CASE("univariate select keeps the highest F columns") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = 60, cols = 6;
  Matrix x(n, cols);
  Labels y(n);
  const double shift[cols] = {0.0, 3.0, 0.1, 1.5, 0.0, 0.8};
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t c = 0; c < cols; ++c) x(i, c) = normal(rng) + shift[c] * y[i];
  }
  // Oracle: one-way ANOVA F statistic per column.
  std::vector<std::pair<double, std::size_t>> f;
  for (std::size_t c = 0; c < cols; ++c) {
    double sum[2] = {0, 0}, cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      sum[y[i]] += x(i, c);
      cnt[y[i]] += 1;
    }
    const double grand = (sum[0] + sum[1]) / n;
    double between = 0, within = 0;
    for (int k = 0; k < 2; ++k) between += cnt[k] * std::pow(sum[k] / cnt[k] - grand, 2);
    for (std::size_t i = 0; i < n; ++i) within += std::pow(x(i, c) - sum[y[i]] / cnt[y[i]], 2);
    f.push_back({-(between / 1.0) / (within / (n - 2)), c});
  }
  std::sort(f.begin(), f.end());
  const auto model = fit(PipelineSpec{UnivariateSelect{3}, Logistic{}, 0}, x, y);
  const auto t = model.transform(x);
  REQUIRE(t.cols() == 3);
  std::vector<std::size_t> expected{f[0].second, f[1].second, f[2].second};
  std::sort(expected.begin(), expected.end());
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < n; ++i) CHECK(t(i, j) == x(i, expected[j]));
  }
  CHECK(fit(PipelineSpec{UnivariateSelect{50}, Logistic{}, 0}, x, y).transform(x).cols() == cols);
}

TEST_CASE("variance threshold removes low-variance columns") {
  auto m = testing::separable_matrix(20, 3, 12);
  for (std::size_t i = 0; i < m.rows(); ++i) m.values(i, 1) = 0.01 * static_cast<double>(i % 2);
  const auto t = fit(PipelineSpec{VarianceThreshold{0.001}, Knn{}, 0}, m.values, m.labels).transform(m.values);
  CHECK(t.cols() == 2);
}

TEST_CASE("unbootstrapped trees vote unanimously on separated clusters") {
  Matrix x(0, 1);
  for (double v : {0.0, 0.1, 0.2, 0.3, 10.0, 10.1, 10.2, 10.3}) x.append_row(std::vector<double>{v});
  const Labels y{0, 0, 0, 0, 1, 1, 1, 1};
  for (const Classifier& c : {Classifier{ExtraTrees{}}, Classifier{DecisionTree{}}}) {
    const auto model = fit(with_classifier(c), x, y);
    CHECK(model.predict_score(Matrix(1, 1, 20.0))[0] == 1.0);
    CHECK(model.predict_score(Matrix(1, 1, -5.0))[0] == 0.0);
  }
  const auto forest = fit(with_classifier(RandomForest{}), x, y);
  CHECK(forest.predict_score(Matrix(1, 1, 20.0))[0] > 0.9);
  CHECK(forest.predict_score(Matrix(1, 1, -5.0))[0] < 0.1);
}

TEST_CASE("decision tree depth limit and minimum leaf size") {
  const auto m = testing::separable_matrix(40, 3, 13, 0.0);
  const auto stump = fit(with_classifier(DecisionTree{1, 1}), m.values, m.labels);
  const auto scores = stump.predict_score(m.values);
  std::vector<double> unique = scores;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  CHECK(unique.size() <= 2);
  const auto big_leaf = fit(with_classifier(DecisionTree{std::nullopt, 20}), m.values, m.labels);
  const auto s2 = big_leaf.predict_score(m.values);
  std::sort(unique.begin(), unique.end());
  std::vector<double> u2 = s2;
  std::sort(u2.begin(), u2.end());
  u2.erase(std::unique(u2.begin(), u2.end()), u2.end());
  CHECK(u2.size() <= 2);
}

TEST_CASE("stochastic models depend on the seed only") {
  const auto m = testing::separable_matrix(50, 6, 14, 0.2);
  const auto probe = testing::separable_matrix(10, 6, 15);
  PipelineSpec a{NoPreprocessing{}, RandomForest{20, MaxFeatures::Sqrt, std::nullopt}, 1};
  PipelineSpec b = a;
  b.seed = 2;
  CHECK(fit(a, m).predict_score(probe) == fit(a, m).predict_score(probe));
  CHECK(fit(a, m).predict_score(probe) != fit(b, m).predict_score(probe));
}
