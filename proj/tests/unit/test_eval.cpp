#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "phyto/error.hpp"
#include "phyto/eval.hpp"

using namespace phyto;

namespace {

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

ErrorCode error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ParseError;
}

Labels balanced(std::size_t per_class) {
  Labels y;
  for (std::size_t i = 0; i < per_class; ++i) {
    y.push_back(0);
    y.push_back(1);
  }
  return y;
}

PipelineSpec knn_spec() { return PipelineSpec{NoPreprocessing{}, Knn{5, KnnWeights::Uniform}, 1}; }

}  // namespace

TEST_CASE("roc_auc on documented inputs") {
  CHECK(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75);
  CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(roc_auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{1, 0, 1}) == 0.5);
  CHECK(error_of([] { roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}); }) ==
        ErrorCode::SingleClassLabels);
  CHECK(error_of([] { roc_auc(std::vector<double>{0.1}, std::vector<int>{1, 0}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("roc_auc matches the pairwise oracle on small random inputs") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(2, 12), coin(0, 1), level(0, 4);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = size(rng);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = level(rng) * 0.25;
      y[i] = coin(rng);
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(std::abs(roc_auc(s, y) - pairwise_auc(s, y)) <= 1e-12);
  }
}

TEST_CASE("roc_auc is invariant under increasing transforms and flips under label complement") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(15), t(15);
    std::vector<int> y(15), flipped(15);
    for (int i = 0; i < 15; ++i) {
      s[i] = u(rng);
      t[i] = std::exp(s[i]) + s[i] * s[i] * s[i];
      y[i] = i % 3 == 0;
      flipped[i] = 1 - y[i];
    }
    CHECK(roc_auc(s, y) == doctest::Approx(roc_auc(t, y)).epsilon(1e-12));
    CHECK(roc_auc(s, y) + roc_auc(s, flipped) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1}) == 1.0);
  CHECK(accuracy(std::vector<int>{1, 0, 1}, std::vector<int>{0, 1, 0}) == 0.0);
  CHECK(accuracy(std::vector<int>{1, 0, 1, 1}, std::vector<int>{1, 0, 1, 0}) == 0.75);
  CHECK(error_of([] { accuracy(std::vector<int>{1}, std::vector<int>{1, 0}); }) == ErrorCode::LengthMismatch);
  CHECK(error_of([] { accuracy(std::vector<int>{}, std::vector<int>{}); }) == ErrorCode::Empty);
}

TEST_CASE("roc curve interpolation stays monotone and anchored") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(30);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) {
      y[i] = i % 2;
      s[i] = u(rng) + 0.3 * y[i];
    }
    const auto tpr = interpolate_tpr(roc_curve(s, y), default_fpr_grid());
    REQUIRE(tpr.size() == 101);
    CHECK(tpr.back() == 1.0);
    for (std::size_t i = 1; i < tpr.size(); ++i) CHECK(tpr[i] >= tpr[i - 1]);
    for (double v : tpr) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("stratified splits follow the cut arithmetic") {
  const auto y = balanced(10);
  const auto plan = stratified_shuffle_splits(y, 20, 0.8, 5);
  CHECK(plan.splits.size() == 20);
  for (const auto& s : plan.splits) {
    CHECK(s.train.size() == 16);
    CHECK(s.validation.size() == 4);
    std::size_t pos = 0;
    for (auto i : s.train) pos += y[i];
    CHECK(pos == 8);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.validation) CHECK(all.insert(i).second);
    CHECK(all.size() == y.size());
  }
  const auto again = stratified_shuffle_splits(y, 20, 0.8, 5);
  for (std::size_t i = 0; i < 20; ++i) CHECK(again.splits[i].train == plan.splits[i].train);
  CHECK(stratified_shuffle_splits(y, 1, 0.8, 6).splits[0].train != plan.splits[0].train);
  CHECK(error_of([] { stratified_shuffle_splits(Labels{0, 0, 0, 1}, 1, 0.8, 0); }) == ErrorCode::ClassTooSmall);
}

TEST_CASE("stratified splits of imbalanced labels stay within one sample per class") {
  Labels y(100, 0);
  for (std::size_t i = 0; i < 30; ++i) y[i * 3] = 1;
  for (double ratio : {0.5, 0.73, 0.8}) {
    const auto plan = stratified_shuffle_splits(y, 500, ratio, 8);
    for (const auto& s : plan.splits) {
      std::size_t pos = 0;
      for (auto i : s.train) pos += y[i];
      CHECK(std::abs(static_cast<double>(pos) - ratio * 30.0) < 1.0);
      CHECK(std::abs(static_cast<double>(s.train.size() - pos) - ratio * 70.0) < 1.0);
    }
  }
}

TEST_CASE("grouped splits keep group members together") {
  const auto y = balanced(15);
  Groups g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = i / 2;
  const auto plan = stratified_shuffle_splits(y, g, 50, 0.8, 3);
  for (const auto& s : plan.splits) {
    std::set<std::size_t> train_groups;
    for (auto i : s.train) train_groups.insert(g[i]);
    for (auto i : s.validation) CHECK(train_groups.count(g[i]) == 0);
    CHECK(s.train.size() + s.validation.size() == y.size());
    CHECK(s.train.size() == 24);
  }
  Groups singletons(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) singletons[i] = i;
  const auto a = stratified_shuffle_splits(y, singletons, 5, 0.8, 3);
  const auto b = stratified_shuffle_splits(y, 5, 0.8, 3);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.splits[i].train == b.splits[i].train);
}

TEST_CASE("summarize uses population std and zero for a single value") {
  const auto s = summarize(std::vector<double>{1.0, 3.0});
  CHECK(s.mean == 2.0);
  CHECK(s.std == 1.0);
  CHECK(summarize(std::vector<double>{0.7}).std == 0.0);
}

TEST_CASE("repeated_eval on separable and permuted data") {
  const auto m = testing::separable_matrix(80, 5, 31);
  const EvalConfig cfg{60, 0.8, 2};
  const auto good = repeated_eval(knn_spec(), m, cfg);
  CHECK(good.roc_auc.mean >= 0.99);
  CHECK(good.n_runs == 60);
  CHECK(good.mean_tpr.size() == 101);
  for (std::size_t i = 1; i < good.mean_tpr.size(); ++i) CHECK(good.mean_tpr[i] >= good.mean_tpr[i - 1]);

  auto permuted = m;
  std::mt19937_64 rng(9);
  std::shuffle(permuted.labels.begin(), permuted.labels.end(), rng);
  const auto null = repeated_eval(knn_spec(), permuted, cfg);
  CHECK(std::abs(null.roc_auc.mean - 0.5) <= 0.1);

  const auto single = repeated_eval(knn_spec(), m, EvalConfig{1, 0.8, 2});
  CHECK(single.roc_auc.std == 0.0);
  CHECK(single.accuracy.std == 0.0);

  const auto again = repeated_eval(knn_spec(), m, cfg);
  CHECK(again.roc_auc.mean == good.roc_auc.mean);
  CHECK(again.mean_tpr == good.mean_tpr);
}

TEST_CASE("holdout_eval") {
  const auto train = testing::separable_matrix(40, 4, 32);
  const auto report = holdout_eval(PipelineSpec{NoPreprocessing{}, Knn{1, KnnWeights::Uniform}, 0}, train, train,
                                   EvalConfig{5, 0.8, 0});
  CHECK(report.accuracy.mean == 1.0);
  CHECK(report.accuracy.std == 0.0);
  CHECK(report.roc_auc.std == 0.0);
  auto other = train;
  other.column_names[0] = "other";
  CHECK(error_of([&] { holdout_eval(knn_spec(), train, other, EvalConfig{2, 0.8, 0}); }) == ErrorCode::ColumnMismatch);
}

TEST_CASE("learning curve") {
  const auto m = testing::separable_matrix(60, 3, 33, 0.2);
  const EvalConfig cfg{30, 0.8, 4};
  const std::vector<std::size_t> grid{4, 16, 48};
  const auto points = learning_curve(PipelineSpec{NoPreprocessing{}, Logistic{}, 0}, m, grid, cfg);
  REQUIRE(points.size() == 3);
  CHECK(points.back().mean_roc_auc >= points.front().mean_roc_auc);
  CHECK(points.back().mean_roc_auc > 0.95);

  const std::vector<std::size_t> full{48};
  const auto at_full = learning_curve(knn_spec(), m, full, cfg);
  const auto rep = repeated_eval(knn_spec(), m, cfg);
  CHECK(at_full[0].mean_roc_auc == doctest::Approx(rep.roc_auc.mean).epsilon(1e-12));

  const std::vector<std::size_t> one{1};
  const auto fallback = learning_curve(knn_spec(), m, one, cfg);
  CHECK(fallback[0].mean_roc_auc == 0.5);
  CHECK(fallback[0].std_roc_auc == 0.0);

  const std::vector<std::size_t> too_big{49};
  CHECK(error_of([&] { learning_curve(knn_spec(), m, too_big, cfg); }) == ErrorCode::GridExceedsData);
}

TEST_CASE("threshold baseline") {
  const auto y = balanced(30);
  std::vector<double> perfect(y.size()), noise(y.size());
  std::mt19937_64 rng(34);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    perfect[i] = y[i] == 1 ? -1000.0 - static_cast<double>(i) : static_cast<double>(i);
    noise[i] = normal(rng);
  }
  const EvalConfig cfg{200, 0.8, 1};
  CHECK(threshold_baseline(perfect, y, cfg).accuracy.mean == 1.0);
  CHECK(std::abs(threshold_baseline(noise, y, cfg).accuracy.mean - 0.5) <= 0.1);
  CHECK(error_of([&] { threshold_baseline(std::vector<double>{1.0}, y, cfg); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("report CSVs") {
  const auto m = testing::separable_matrix(30, 2, 35);
  const auto report = repeated_eval(knn_spec(), m, EvalConfig{3, 0.8, 0});
  std::ostringstream summary, curve;
  write_summary_csv(summary, report);
  write_curve_csv(curve, report);
  std::istringstream in(summary.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "metric,mean,std,n_runs");
  std::getline(in, line);
  CHECK(line.rfind("accuracy,", 0) == 0);
  std::getline(in, line);
  const auto comma = line.find(',');
  CHECK(line.substr(0, comma) == "roc_auc");
  CHECK(std::stod(line.substr(comma + 1)) == report.roc_auc.mean);
  const auto text = curve.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 102);
}
