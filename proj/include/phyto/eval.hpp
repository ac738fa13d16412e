#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "phyto/feature_matrix.hpp"
#include "phyto/matrix.hpp"
#include "phyto/models.hpp"

namespace phyto {

/// Mann-Whitney estimate of P(score_pos > score_neg), ties counted 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

double accuracy(std::span<const int> predicted, std::span<const int> labels);

struct RocCurve {
  std::vector<double> fpr;  // non-decreasing, from 0 to 1
  std::vector<double> tpr;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// TPR of the curve at each grid FPR by linear interpolation; where several
/// points share an FPR the highest TPR is used.
std::vector<double> interpolate_tpr(const RocCurve& curve, std::span<const double> fpr_grid);

/// 101-point grid 0, 0.01, ..., 1.
std::vector<double> default_fpr_grid();

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

struct SplitPlan {
  std::vector<Split> splits;
  bool stratified = true;
  double ratio = 0.8;
  std::uint64_t seed = 0;
};

/// Each split shuffles every class independently and sends the first
/// round(ratio * class_count) members to training.
SplitPlan stratified_shuffle_splits(const Labels& labels, std::size_t n_splits, double train_ratio,
                                    std::uint64_t seed);

/// Group-preserving variant: rows of one group always land on the same side.
/// Groups are stratified by their label composition (e.g. one stimulus plus
/// one prestimulus row). Empty or all-singleton groups give exactly the
/// ungrouped plan.
SplitPlan stratified_shuffle_splits(const Labels& labels, const Groups& groups, std::size_t n_splits,
                                    double train_ratio, std::uint64_t seed);

struct EvalConfig {
  std::size_t n_runs = 500;
  double train_ratio = 0.8;
  std::uint64_t seed = 0;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population; 0 when n_runs == 1
};

MetricSummary summarize(std::span<const double> values);

struct EvaluationReport {
  MetricSummary accuracy;
  MetricSummary roc_auc;
  std::vector<double> fpr_grid;
  std::vector<double> mean_tpr;
  std::vector<double> std_tpr;
  std::size_t n_runs = 0;
  EvalConfig config;
};

/// Run r uses split r of stratified_shuffle_splits(y, groups, n_runs, ratio, seed)
/// and fits with a seed derived from (spec.seed, r). FeatureMatrix overloads
/// group rows by exposition.
EvaluationReport repeated_eval(const PipelineSpec& spec, const Matrix& x, const Labels& y, const EvalConfig& cfg,
                               const Groups& groups = {});
EvaluationReport repeated_eval(const PipelineSpec& spec, const FeatureMatrix& x, const EvalConfig& cfg);

/// Fits on the whole analysis set every run and scores the fixed test set.
EvaluationReport holdout_eval(const PipelineSpec& spec, const FeatureMatrix& analysis, const FeatureMatrix& test,
                              const EvalConfig& cfg);

struct LearningCurvePoint {
  std::size_t n_samples = 0;
  double mean_roc_auc = 0.0;
  double std_roc_auc = 0.0;
};

/// Subsets of each grid size are drawn from the training side of the same
/// splits repeated_eval uses; single-class subsets score 0.5 after 100 redraws.
std::vector<LearningCurvePoint> learning_curve(const PipelineSpec& spec, const Matrix& x, const Labels& y,
                                               std::span<const std::size_t> grid, const EvalConfig& cfg,
                                               const Groups& groups = {});
std::vector<LearningCurvePoint> learning_curve(const PipelineSpec& spec, const FeatureMatrix& x,
                                               std::span<const std::size_t> grid, const EvalConfig& cfg);

struct BaselineReport {
  MetricSummary accuracy;
  std::size_t n_runs = 0;
};

/// One-feature threshold classifier: threshold and polarity maximize training
/// accuracy over midpoints of the sorted unique training values.
BaselineReport threshold_baseline(std::span<const double> scalar, const Labels& y, const EvalConfig& cfg,
                                  const Groups& groups = {});

void write_summary_csv(std::ostream& out, const EvaluationReport& report);
void write_curve_csv(std::ostream& out, const EvaluationReport& report);
void write_learning_curve_csv(std::ostream& out, std::span<const LearningCurvePoint> points);
void write_baseline_csv(std::ostream& out, const BaselineReport& report);

}  // namespace phyto
