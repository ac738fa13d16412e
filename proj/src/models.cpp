#include <algorithm>
#include <cmath>

#include "model_impl.hpp"
#include "phyto/error.hpp"

namespace phyto {

FittedPipeline fit(const PipelineSpec& spec, const Matrix& x, const Labels& y, std::vector<std::string> column_names) {
  spec.validate();
  if (y.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "labels do not match row count");
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorCode::Empty, "empty training matrix");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::DegenerateLabels, "labels must be 0 or 1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == y.size()) throw Error(ErrorCode::SingleClassTraining, "training labels contain one class");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeatures, "training matrix contains non-finite values");
  }
  if (!column_names.empty() && column_names.size() != x.cols()) {
    throw Error(ErrorCode::ColumnMismatch, "column names do not match matrix width");
  }

  FittedPipeline out;
  out.spec_ = spec;
  out.columns_ = std::move(column_names);
  out.n_inputs_ = x.cols();
  auto transform = std::make_shared<detail::FittedTransform>(detail::FittedTransform::fit(spec.preprocessor, x, y));
  const Matrix xt = transform->apply(x);
  const std::uint64_t seed = derive_seed(spec.seed, component_name(spec.classifier));

  switch (spec.classifier.index()) {
    case 0: out.model_ = detail::fit_knn(std::get<Knn>(spec.classifier), xt, y); break;
    case 1: out.model_ = detail::fit_decision_tree(std::get<DecisionTree>(spec.classifier), xt, y); break;
    case 2: out.model_ = detail::fit_random_forest(std::get<RandomForest>(spec.classifier), xt, y, seed); break;
    case 3: out.model_ = detail::fit_extra_trees(std::get<ExtraTrees>(spec.classifier), xt, y, seed); break;
    case 4: out.model_ = detail::fit_gradient_boosting(std::get<GradientBoostedTrees>(spec.classifier), xt, y); break;
    case 5: out.model_ = detail::fit_logistic(std::get<Logistic>(spec.classifier), xt, y); break;
  }
  out.transform_ = std::move(transform);
  return out;
}

FittedPipeline fit(const PipelineSpec& spec, const FeatureMatrix& x) {
  x.check();
  return fit(spec, x.values, x.labels, x.column_names);
}

std::vector<double> FittedPipeline::predict_score(const FeatureMatrix& x) const {
  if (!columns_.empty() && x.column_names != columns_) {
    throw Error(ErrorCode::ColumnMismatch, "prediction columns differ from training columns");
  }
  return predict_score(x.values);
}

Matrix FittedPipeline::transform(const Matrix& x) const {
  if (x.cols() != n_inputs_ && x.rows() > 0) {
    throw Error(ErrorCode::ColumnMismatch, "expected " + std::to_string(n_inputs_) + " columns, got " +
                                               std::to_string(x.cols()));
  }
  return transform_->apply(x);
}

std::vector<double> FittedPipeline::predict_score(const Matrix& x) const {
  const Matrix xt = transform(x);
  std::vector<double> scores(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) scores[i] = std::clamp(model_->score(xt.row(i)), 0.0, 1.0);
  return scores;
}

Labels FittedPipeline::predict_label(const FeatureMatrix& x, double threshold) const {
  return threshold_scores(predict_score(x), threshold);
}

Labels FittedPipeline::predict_label(const Matrix& x, double threshold) const {
  return threshold_scores(predict_score(x), threshold);
}

Labels threshold_scores(std::span<const double> scores, double threshold) {
  Labels out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace phyto
