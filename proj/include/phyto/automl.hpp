#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phyto/eval.hpp"
#include "phyto/feature_matrix.hpp"
#include "phyto/models.hpp"
#include "phyto/random.hpp"

namespace phyto {

enum class Metric { RocAuc, Accuracy };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);

struct SearchConfig {
  Metric metric = Metric::RocAuc;
  std::size_t n_validation_splits = 5;
  double split_ratio = 0.8;
  std::size_t n_hpo_steps = 100;
  std::uint64_t seed = 0;
  std::optional<std::chrono::duration<double>> timeout;  // none = run to completion

  void validate() const;
};

struct CandidateResult {
  int phase = 1;
  PipelineSpec spec;
  std::vector<double> split_scores;
  double mean_score = 0.0;  // -inf when failed
  bool failed = false;
  std::string failure;
};

struct SearchReport {
  std::vector<CandidateResult> log;
  std::size_t phase1_winner = 0;  // index into log
  std::size_t best_index = 0;     // index into log
  PipelineSpec best_spec;
  double best_score = 0.0;
  std::optional<FittedPipeline> final_pipeline;
  SearchConfig config;
  bool truncated = false;
};

/// A (preprocessor, classifier) pair identified by registry variant indices.
struct Combination {
  std::size_t preprocessor = 0;
  std::size_t classifier = 0;
};

/// Fits on every training part and scores the validation part; failures are
/// absorbed into the result (mean = -inf, failed = true).
CandidateResult evaluate_candidate(const PipelineSpec& spec, const Matrix& x, const Labels& y, const SplitPlan& splits,
                                   Metric metric);

/// Draws each hyperparameter uniformly from its search space, redrawing until
/// the configuration is valid for a matrix with n_columns columns.
PipelineSpec sample_hyperparameters(const Combination& combination, Rng& rng, std::size_t n_columns,
                                    std::uint64_t seed = 0);

/// Validation splits shared by every candidate of a search.
SplitPlan validation_splits(const Labels& y, const SearchConfig& cfg, const Groups& groups = {});

/// Phase 1 enumerates registry defaults, phase 2 random-searches the winning
/// combination; the best spec is refit on all data.
/// Rows sharing a group are kept on one side of every validation split; the
/// FeatureMatrix overload groups rows by exposition.
SearchReport search(const Matrix& x, const Labels& y, const SearchConfig& cfg, const Groups& groups = {});
SearchReport search(const FeatureMatrix& x, const SearchConfig& cfg);

/// `phase,preprocessor,classifier,hyperparameters,split_1..split_n,mean_score,failed`
void write_search_report_csv(std::ostream& out, const SearchReport& report);
/// key,value summary of the final spec.
void write_search_summary_csv(std::ostream& out, const SearchReport& report);

}  // namespace phyto
