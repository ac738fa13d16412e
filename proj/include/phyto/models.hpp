#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "phyto/feature_matrix.hpp"
#include "phyto/matrix.hpp"

namespace phyto {

// ---- preprocessors --------------------------------------------------------

struct NoPreprocessing {
  bool operator==(const NoPreprocessing&) const = default;
};
/// Keeps columns whose population variance is strictly above the threshold.
struct VarianceThreshold {
  double threshold = 0.0;
  bool operator==(const VarianceThreshold&) const = default;
};
struct MinMaxScaler {
  bool operator==(const MinMaxScaler&) const = default;
};
struct L2Normalizer {
  bool operator==(const L2Normalizer&) const = default;
};
/// Keeps the k columns with the largest ANOVA F statistic.
struct UnivariateSelect {
  int k = 50;
  bool operator==(const UnivariateSelect&) const = default;
};

using Preprocessor = std::variant<NoPreprocessing, VarianceThreshold, MinMaxScaler, L2Normalizer, UnivariateSelect>;

// ---- classifiers ----------------------------------------------------------

enum class KnnWeights { Uniform, Distance };
enum class MaxFeatures { Sqrt, Log2, Half };

struct Knn {
  int k = 5;
  KnnWeights weights = KnnWeights::Uniform;
  bool operator==(const Knn&) const = default;
};
struct DecisionTree {
  std::optional<int> max_depth;  // nullopt = unlimited
  int min_leaf = 1;
  bool operator==(const DecisionTree&) const = default;
};
struct RandomForest {
  int n_trees = 100;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  std::optional<int> max_depth;
  bool operator==(const RandomForest&) const = default;
};
struct ExtraTrees {
  int n_trees = 100;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  std::optional<int> max_depth;
  bool operator==(const ExtraTrees&) const = default;
};
struct GradientBoostedTrees {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_bins = 255;
  int max_depth = 3;
  bool operator==(const GradientBoostedTrees&) const = default;
};
/// L2-regularized logistic regression; `strength` is the inverse penalty C.
struct Logistic {
  double strength = 1.0;
  bool operator==(const Logistic&) const = default;
};

using Classifier = std::variant<Knn, DecisionTree, RandomForest, ExtraTrees, GradientBoostedTrees, Logistic>;

std::string_view component_name(const Preprocessor& p);
std::string_view component_name(const Classifier& c);

/// Declarative pipeline: preprocessor -> classifier, plus the fit seed.
///
/// Text form (used in reports and on the command line):
///   `univariate_select(k=50) + knn(k=5;weights=uniform) seed=7`
struct PipelineSpec {
  Preprocessor preprocessor = NoPreprocessing{};
  Classifier classifier = Knn{};
  std::uint64_t seed = 0;

  bool operator==(const PipelineSpec&) const = default;

  std::string to_string() const;
  /// `k=50;...` parameter lists of both components, without names.
  std::string preprocessor_params() const;
  std::string classifier_params() const;
  static PipelineSpec parse(std::string_view text);
  void validate() const;
};

struct ComponentRegistry {
  std::vector<Preprocessor> preprocessors;
  std::vector<Classifier> classifiers;
};

/// Registry of searchable components with their default hyperparameters.
const ComponentRegistry& list_components();

namespace detail {
class FittedTransform;
class Model;
}  // namespace detail

/// Immutable trained pipeline; safe to share across threads.
class FittedPipeline {
 public:
  const PipelineSpec& spec() const noexcept { return spec_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }

  /// Output of the fitted preprocessor.
  Matrix transform(const Matrix& x) const;

  /// Probability of the positive class for each row; columns must match training columns.
  std::vector<double> predict_score(const FeatureMatrix& x) const;
  std::vector<double> predict_score(const Matrix& x) const;
  Labels predict_label(const FeatureMatrix& x, double threshold = 0.5) const;
  Labels predict_label(const Matrix& x, double threshold = 0.5) const;

 private:
  friend FittedPipeline fit(const PipelineSpec&, const Matrix&, const Labels&, std::vector<std::string>);

  PipelineSpec spec_;
  std::vector<std::string> columns_;
  std::size_t n_inputs_ = 0;
  std::shared_ptr<const detail::FittedTransform> transform_;
  std::shared_ptr<const detail::Model> model_;
};

FittedPipeline fit(const PipelineSpec& spec, const Matrix& x, const Labels& y,
                   std::vector<std::string> column_names = {});
FittedPipeline fit(const PipelineSpec& spec, const FeatureMatrix& x);

Labels threshold_scores(std::span<const double> scores, double threshold = 0.5);

}  // namespace phyto
