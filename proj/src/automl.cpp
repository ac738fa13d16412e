#include "phyto/automl.hpp"

#include <cmath>
#include <limits>

#include "phyto/error.hpp"
#include "phyto/parallel.hpp"
#include "phyto/text.hpp"

namespace phyto {

namespace {

constexpr int kMaxResampleAttempts = 1000;
constexpr double kFailedScore = -std::numeric_limits<double>::infinity();

double log_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::optional<int> depth_or_unlimited(Rng& rng, int lo, int hi) {
  // hi - lo + 1 finite depths plus "unlimited", each equally likely.
  const int pick = uniform_int(rng, lo, hi + 1);
  return pick > hi ? std::nullopt : std::optional<int>(pick);
}

MaxFeatures draw_max_features(Rng& rng) {
  static constexpr MaxFeatures options[] = {MaxFeatures::Sqrt, MaxFeatures::Log2, MaxFeatures::Half};
  return options[uniform_int(rng, 0, 2)];
}

Preprocessor draw_preprocessor(std::size_t kind, Rng& rng) {
  switch (kind) {
    case 0: return NoPreprocessing{};
    case 1: return VarianceThreshold{std::uniform_real_distribution<double>(0.0, 0.1)(rng)};
    case 2: return MinMaxScaler{};
    case 3: return L2Normalizer{};
    case 4: return UnivariateSelect{uniform_int(rng, 10, 200)};
  }
  throw Error(ErrorCode::InvalidSpec, "unknown preprocessor index");
}

Classifier draw_classifier(std::size_t kind, Rng& rng) {
  switch (kind) {
    case 0: {
      Knn k;
      k.k = 2 * uniform_int(rng, 0, 12) + 1;
      k.weights = uniform_int(rng, 0, 1) == 0 ? KnnWeights::Uniform : KnnWeights::Distance;
      return k;
    }
    case 1: {
      DecisionTree t;
      t.max_depth = depth_or_unlimited(rng, 2, 20);
      t.min_leaf = uniform_int(rng, 1, 10);
      return t;
    }
    case 2: {
      RandomForest f;
      f.n_trees = uniform_int(rng, 50, 300);
      f.max_features = draw_max_features(rng);
      f.max_depth = depth_or_unlimited(rng, 4, 20);
      return f;
    }
    case 3: {
      ExtraTrees f;
      f.n_trees = uniform_int(rng, 50, 300);
      f.max_features = draw_max_features(rng);
      f.max_depth = depth_or_unlimited(rng, 4, 20);
      return f;
    }
    case 4: {
      GradientBoostedTrees g;
      g.n_rounds = uniform_int(rng, 50, 300);
      g.learning_rate = log_uniform(rng, 0.01, 0.3);
      g.max_depth = uniform_int(rng, 2, 6);
      return g;
    }
    case 5: return Logistic{log_uniform(rng, 1e-3, 1e3)};
  }
  throw Error(ErrorCode::InvalidSpec, "unknown classifier index");
}

bool valid_for(const PipelineSpec& spec, std::size_t n_columns) {
  if (const auto* u = std::get_if<UnivariateSelect>(&spec.preprocessor)) {
    return static_cast<std::size_t>(u->k) <= n_columns;
  }
  return true;
}

void check_inputs(const Matrix& x, const Labels& y, const SearchConfig& cfg) {
  if (x.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "labels do not match row count");
  std::size_t counts[2] = {0, 0};
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::DegenerateLabels, "labels must be 0 or 1");
    counts[v] += 1;
  }
  if (counts[0] == 0 || counts[1] == 0) throw Error(ErrorCode::DegenerateLabels, "only one class present");
  for (auto c : counts) {
    const auto train = static_cast<std::size_t>(std::llround(cfg.split_ratio * static_cast<double>(c)));
    if (c < 3 || train < 2 || train >= c) {
      throw Error(ErrorCode::TooFewSamples, "a class with " + std::to_string(c) +
                                                " samples cannot supply 2 training and 1 validation sample per split");
    }
  }
}

}  // namespace

std::string_view to_string(Metric m) { return m == Metric::RocAuc ? "roc_auc" : "accuracy"; }

Metric parse_metric(std::string_view text) {
  if (text == "roc_auc") return Metric::RocAuc;
  if (text == "accuracy") return Metric::Accuracy;
  throw Error(ErrorCode::InvalidConfig, "metric must be roc_auc or accuracy");
}

void SearchConfig::validate() const {
  if (n_validation_splits < 1) throw Error(ErrorCode::InvalidConfig, "n_validation_splits must be >= 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "split_ratio must be in (0, 1)");
}

CandidateResult evaluate_candidate(const PipelineSpec& spec, const Matrix& x, const Labels& y, const SplitPlan& splits,
                                   Metric metric) {
  CandidateResult result;
  result.spec = spec;
  try {
    for (const auto& split : splits.splits) {
      const auto model = fit(spec, x.select_rows(split.train), select_labels(y, split.train));
      const auto y_val = select_labels(y, split.validation);
      const auto scores = model.predict_score(x.select_rows(split.validation));
      result.split_scores.push_back(metric == Metric::RocAuc ? roc_auc(scores, y_val)
                                                             : accuracy(threshold_scores(scores), y_val));
    }
    double total = 0.0;
    for (double s : result.split_scores) total += s;
    result.mean_score = total / static_cast<double>(result.split_scores.size());
  } catch (const Error& e) {
    result.failed = true;
    result.failure = e.what();
    result.split_scores.clear();
    result.mean_score = kFailedScore;
  }
  return result;
}

PipelineSpec sample_hyperparameters(const Combination& combination, Rng& rng, std::size_t n_columns,
                                    std::uint64_t seed) {
  for (int attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
    PipelineSpec spec;
    spec.preprocessor = draw_preprocessor(combination.preprocessor, rng);
    spec.classifier = draw_classifier(combination.classifier, rng);
    spec.seed = seed;
    if (valid_for(spec, n_columns)) return spec;
  }
  throw Error(ErrorCode::NoValidConfiguration,
              "no valid configuration after " + std::to_string(kMaxResampleAttempts) + " draws");
}

namespace {

SearchReport search_impl(const Matrix& x, const Labels& y, const SearchConfig& cfg, const Groups& groups,
                         const std::vector<std::string>& column_names) {
  cfg.validate();
  check_inputs(x, y, cfg);
  const auto started = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return cfg.timeout && std::chrono::steady_clock::now() - started > *cfg.timeout;
  };

  const auto splits = validation_splits(y, cfg, groups);
  SearchReport report;
  report.config = cfg;

  const auto& registry = list_components();
  std::vector<PipelineSpec> phase1;
  for (const auto& p : registry.preprocessors) {
    for (const auto& c : registry.classifiers) phase1.push_back(PipelineSpec{p, c, cfg.seed});
  }
  std::vector<CandidateResult> results(phase1.size());
  std::vector<char> done(phase1.size(), 0);
  parallel_for(phase1.size(), [&](std::size_t i) {
    if (out_of_time()) return;
    results[i] = evaluate_candidate(phase1[i], x, y, splits, cfg.metric);
    results[i].phase = 1;
    done[i] = 1;
  });
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!done[i]) {
      report.truncated = true;
      break;
    }
    report.log.push_back(std::move(results[i]));
  }
  if (report.log.empty()) throw Error(ErrorCode::InvalidConfig, "timeout expired before any candidate was evaluated");

  auto argmax = [&](std::size_t begin, std::size_t end) {
    std::size_t best = begin;
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (report.log[i].mean_score > report.log[best].mean_score) best = i;
    }
    return best;
  };
  report.phase1_winner = argmax(0, report.log.size());
  const auto& winner = report.log[report.phase1_winner].spec;
  const Combination combo{winner.preprocessor.index(), winner.classifier.index()};

  if (!report.truncated && cfg.n_hpo_steps > 0) {
    Rng rng(derive_seed(cfg.seed, "hyperparameter_search"));
    std::vector<PipelineSpec> trials;
    for (std::size_t s = 0; s < cfg.n_hpo_steps; ++s) trials.push_back(sample_hyperparameters(combo, rng, x.cols(), cfg.seed));
    std::vector<CandidateResult> trial_results(trials.size());
    std::vector<char> trial_done(trials.size(), 0);
    parallel_for(trials.size(), [&](std::size_t i) {
      if (out_of_time()) return;
      trial_results[i] = evaluate_candidate(trials[i], x, y, splits, cfg.metric);
      trial_results[i].phase = 2;
      trial_done[i] = 1;
    });
    for (std::size_t i = 0; i < trial_results.size(); ++i) {
      if (!trial_done[i]) {
        report.truncated = true;
        break;
      }
      report.log.push_back(std::move(trial_results[i]));
    }
  }

  report.best_index = argmax(0, report.log.size());
  report.best_spec = report.log[report.best_index].spec;
  report.best_score = report.log[report.best_index].mean_score;
  if (!report.log[report.best_index].failed) report.final_pipeline = fit(report.best_spec, x, y, column_names);
  return report;
}

}  // namespace

SplitPlan validation_splits(const Labels& y, const SearchConfig& cfg, const Groups& groups) {
  return stratified_shuffle_splits(y, groups, cfg.n_validation_splits, cfg.split_ratio,
                                   derive_seed(cfg.seed, "validation_splits"));
}

SearchReport search(const Matrix& x, const Labels& y, const SearchConfig& cfg, const Groups& groups) {
  return search_impl(x, y, cfg, groups, {});
}

SearchReport search(const FeatureMatrix& x, const SearchConfig& cfg) {
  x.check();
  return search_impl(x.values, x.labels, cfg, groups_of(x), x.column_names);
}

void write_search_report_csv(std::ostream& out, const SearchReport& report) {
  const std::size_t n = report.config.n_validation_splits;
  out << "phase,preprocessor,classifier,hyperparameters";
  for (std::size_t s = 0; s < n; ++s) out << ",split_" << s + 1;
  out << ",mean_score,failed\n";
  for (const auto& c : report.log) {
    std::string params;
    const auto pp = c.spec.preprocessor_params();
    const auto cp = c.spec.classifier_params();
    auto append = [&](const std::string& prefix, const std::string& list) {
      if (list.empty()) return;
      for (auto item : split(list, ';')) {
        if (!params.empty()) params += ';';
        params += prefix + std::string(item);
      }
    };
    append("pre.", pp);
    append("clf.", cp);
    out << c.phase << ',' << component_name(c.spec.preprocessor) << ',' << component_name(c.spec.classifier) << ','
        << params;
    for (std::size_t s = 0; s < n; ++s) {
      out << ',' << (s < c.split_scores.size() ? format_double(c.split_scores[s]) : std::string("nan"));
    }
    out << ',' << format_double(c.mean_score) << ',' << (c.failed ? 1 : 0) << '\n';
  }
}

void write_search_summary_csv(std::ostream& out, const SearchReport& report) {
  out << "key,value\n";
  out << "metric," << to_string(report.config.metric) << '\n';
  out << "best_spec," << report.best_spec.to_string() << '\n';
  out << "best_mean_score," << format_double(report.best_score) << '\n';
  out << "best_index," << report.best_index << '\n';
  out << "phase1_winner," << report.log[report.phase1_winner].spec.to_string() << '\n';
  out << "candidates," << report.log.size() << '\n';
  out << "truncated," << (report.truncated ? 1 : 0) << '\n';
}

}  // namespace phyto
