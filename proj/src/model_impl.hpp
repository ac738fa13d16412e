#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "phyto/matrix.hpp"
#include "phyto/models.hpp"
#include "phyto/random.hpp"

namespace phyto::detail {

/// Trained classifier; score() returns P(y = 1 | row).
class Model {
 public:
  virtual ~Model() = default;
  virtual double score(std::span<const double> row) const = 0;
};

class FittedTransform {
 public:
  static FittedTransform fit(const Preprocessor& p, const Matrix& x, const Labels& y);
  Matrix apply(const Matrix& x) const;
  std::size_t output_cols() const noexcept;

 private:
  enum class Kind { Identity, SelectColumns, MinMax, L2 };
  Kind kind_ = Kind::Identity;
  std::size_t n_inputs_ = 0;
  std::vector<std::size_t> keep_;
  std::vector<double> min_;
  std::vector<double> range_;
};

/// Binary classification tree over raw feature values.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class Tree {
 public:
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
  }
};

struct TreeParams {
  std::optional<int> max_depth;
  int min_leaf = 1;
  std::size_t max_features = 0;  // 0 = consider every feature
  bool random_thresholds = false;
};

/// Grows a Gini tree on the given sample multiset (duplicates allowed).
Tree grow_tree(const Matrix& x, const Labels& y, std::vector<std::size_t> samples, const TreeParams& params,
               Rng& rng);

std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features);

std::shared_ptr<const Model> fit_knn(const Knn& params, const Matrix& x, const Labels& y);
std::shared_ptr<const Model> fit_decision_tree(const DecisionTree& params, const Matrix& x, const Labels& y);
std::shared_ptr<const Model> fit_random_forest(const RandomForest& params, const Matrix& x, const Labels& y,
                                               std::uint64_t seed);
std::shared_ptr<const Model> fit_extra_trees(const ExtraTrees& params, const Matrix& x, const Labels& y,
                                             std::uint64_t seed);
std::shared_ptr<const Model> fit_gradient_boosting(const GradientBoostedTrees& params, const Matrix& x,
                                                   const Labels& y);
std::shared_ptr<const Model> fit_logistic(const Logistic& params, const Matrix& x, const Labels& y);

}  // namespace phyto::detail
