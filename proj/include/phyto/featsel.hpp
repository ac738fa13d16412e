#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phyto/eval.hpp"
#include "phyto/feature_matrix.hpp"
#include "phyto/models.hpp"

namespace phyto {

struct BeamStage {
  std::optional<std::size_t> max_set_size;  // nullopt = unbounded
  std::size_t width = 1;
};

/// Beam width as a function of selected-set size.
struct BeamSchedule {
  std::vector<BeamStage> stages;

  static BeamSchedule default_schedule();
  static BeamSchedule parse(std::string_view text);  // "40:10,100:5,inf:3"
  std::string to_string() const;

  void validate() const;
  std::size_t width_for(std::size_t set_size) const;
};

struct SelectionConfig {
  std::size_t n_runs = 100;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_rounds;  // nullopt = min(columns, 120)
};

struct ScoredSet {
  std::vector<std::size_t> features;  // sorted column indices
  double mean_roc_auc = 0.0;
  double std_roc_auc = 0.0;
  bool failed = false;
};

struct SelectionRound {
  std::size_t size = 0;
  std::vector<ScoredSet> kept;  // best first
  std::size_t n_candidates = 0;
};

struct SelectionTrace {
  std::vector<std::string> column_names;
  std::vector<SelectionRound> rounds;
  PipelineSpec spec;
  BeamSchedule schedule;
  SelectionConfig config;
};

struct BestSubset {
  std::vector<std::size_t> features;
  std::vector<std::string> names;
  std::size_t size = 0;
  double mean_roc_auc = 0.0;
  double std_roc_auc = 0.0;
};

struct CurvePoint {
  std::size_t size = 0;
  double mean_roc_auc = 0.0;
  double std_roc_auc = 0.0;
  double running_max = 0.0;
};

/// Splits shared by every candidate of the given 1-based round; forward_select
/// groups rows by exposition.
SplitPlan round_splits(const Labels& y, const SelectionConfig& cfg, std::size_t round, const Groups& groups = {});

/// Mean and std ROC AUC of `spec` restricted to `features` over `splits`.
ScoredSet score_subset(const PipelineSpec& spec, const Matrix& x, const Labels& y,
                       const std::vector<std::size_t>& features, const SplitPlan& splits);

SelectionTrace forward_select(const FeatureMatrix& x, const PipelineSpec& spec, const BeamSchedule& schedule,
                              const SelectionConfig& cfg);

BestSubset best_subset(const SelectionTrace& trace);
std::vector<CurvePoint> running_best_curve(const SelectionTrace& trace);

void write_trace_csv(std::ostream& out, const SelectionTrace& trace);
void write_selection_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace phyto
