#include "phyto/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "phyto/error.hpp"
#include "phyto/parallel.hpp"
#include "phyto/random.hpp"
#include "phyto/text.hpp"

namespace phyto {

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels, std::size_t& pos, std::size_t& neg) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  pos = neg = 0;
  for (int v : labels) (v == 1 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClassLabels, "ROC requires both classes");
}

PipelineSpec run_spec(const PipelineSpec& spec, std::size_t run) {
  PipelineSpec s = spec;
  s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(run));
  return s;
}

struct RunOutcome {
  double accuracy = 0.0;
  double roc_auc = 0.0;
  std::vector<double> tpr;
};

RunOutcome score_run(const FittedPipeline& model, const Matrix& x_val, const Labels& y_val,
                     std::span<const double> grid) {
  RunOutcome out;
  const auto scores = model.predict_score(x_val);
  out.accuracy = accuracy(threshold_scores(scores), y_val);
  out.roc_auc = roc_auc(scores, y_val);
  out.tpr = interpolate_tpr(roc_curve(scores, y_val), grid);
  return out;
}

EvaluationReport aggregate(const std::vector<RunOutcome>& runs, const EvalConfig& cfg) {
  EvaluationReport report;
  report.config = cfg;
  report.n_runs = runs.size();
  report.fpr_grid = default_fpr_grid();
  std::vector<double> acc, auc;
  for (const auto& r : runs) {
    acc.push_back(r.accuracy);
    auc.push_back(r.roc_auc);
  }
  report.accuracy = summarize(acc);
  report.roc_auc = summarize(auc);
  std::vector<double> column(runs.size());
  for (std::size_t g = 0; g < report.fpr_grid.size(); ++g) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r].tpr[g];
    auto s = summarize(column);
    report.mean_tpr.push_back(s.mean);
    report.std_tpr.push_back(s.std);
  }
  return report;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, pos, neg);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "prediction/label lengths differ");
  if (labels.empty()) throw Error(ErrorCode::Empty, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, pos, neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1;
      ++j;
    }
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    i = j;
  }
  return curve;
}

std::vector<double> interpolate_tpr(const RocCurve& curve, std::span<const double> fpr_grid) {
  std::vector<double> out;
  out.reserve(fpr_grid.size());
  const std::size_t m = curve.fpr.size();
  for (double f : fpr_grid) {
    // Last point with fpr <= f carries the highest TPR at that FPR.
    auto it = std::upper_bound(curve.fpr.begin(), curve.fpr.end(), f);
    const std::size_t j = it == curve.fpr.begin() ? 0 : static_cast<std::size_t>(it - curve.fpr.begin()) - 1;
    if (j + 1 >= m) {
      out.push_back(curve.tpr[m - 1]);
      continue;
    }
    const double f0 = curve.fpr[j], f1 = curve.fpr[j + 1];
    const double w = f1 > f0 ? std::clamp((f - f0) / (f1 - f0), 0.0, 1.0) : 0.0;
    out.push_back(curve.tpr[j] + w * (curve.tpr[j + 1] - curve.tpr[j]));
  }
  return out;
}

std::vector<double> default_fpr_grid() {
  std::vector<double> grid(101);
  for (std::size_t i = 0; i <= 100; ++i) grid[i] = static_cast<double>(i) / 100.0;
  return grid;
}

SplitPlan stratified_shuffle_splits(const Labels& labels, std::size_t n_splits, double train_ratio,
                                    std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "train ratio must be in (0, 1)");
  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::DegenerateLabels, "labels must be 0 or 1");
    members[labels[i]].push_back(i);
  }
  std::size_t cut[2];
  for (int c = 0; c < 2; ++c) {
    const double share = train_ratio * static_cast<double>(members[c].size());
    if (members[c].size() < 2 || std::floor(share) < 1.0) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has " +
                                                std::to_string(members[c].size()) + " members");
    }
    cut[c] = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(share)), 1, members[c].size() - 1);
  }

  SplitPlan plan;
  plan.ratio = train_ratio;
  plan.seed = seed;
  plan.splits.resize(n_splits);
  for (std::size_t s = 0; s < n_splits; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    auto& split = plan.splits[s];
    for (int c = 0; c < 2; ++c) {
      auto shuffled = members[c];
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      split.train.insert(split.train.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(cut[c]));
      split.validation.insert(split.validation.end(), shuffled.begin() + static_cast<std::ptrdiff_t>(cut[c]),
                              shuffled.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
  }
  return plan;
}

SplitPlan stratified_shuffle_splits(const Labels& labels, const Groups& groups, std::size_t n_splits,
                                    double train_ratio, std::uint64_t seed) {
  if (groups.empty()) return stratified_shuffle_splits(labels, n_splits, train_ratio, seed);
  if (groups.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "groups do not match labels");
  std::map<std::size_t, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < groups.size(); ++i) by_group[groups[i]].push_back(i);
  if (by_group.size() == groups.size()) return stratified_shuffle_splits(labels, n_splits, train_ratio, seed);
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "train ratio must be in (0, 1)");

  std::size_t class_size[2] = {0, 0};
  for (int v : labels) {
    if (v != 0 && v != 1) throw Error(ErrorCode::DegenerateLabels, "labels must be 0 or 1");
    class_size[v] += 1;
  }
  for (int c = 0; c < 2; ++c) {
    if (class_size[c] < 2 || std::floor(train_ratio * static_cast<double>(class_size[c])) < 1.0) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has " +
                                                std::to_string(class_size[c]) + " members");
    }
  }

  // Strata are label compositions (n_negative, n_positive); groups inside a
  // stratum are ordered by their first row.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const std::vector<std::size_t>*>> strata;
  for (const auto& [g, rows] : by_group) {
    std::size_t n_pos = 0;
    for (auto i : rows) n_pos += labels[i] == 1;
    strata[{rows.size() - n_pos, n_pos}].push_back(&rows);
  }
  for (auto& [key, list] : strata) {
    std::sort(list.begin(), list.end(), [](const auto* a, const auto* b) { return a->front() < b->front(); });
  }

  SplitPlan plan;
  plan.ratio = train_ratio;
  plan.seed = seed;
  plan.splits.resize(n_splits);
  for (std::size_t s = 0; s < n_splits; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    auto& split = plan.splits[s];
    for (const auto& [key, list] : strata) {
      auto shuffled = list;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      auto cut = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(shuffled.size())));
      cut = shuffled.size() < 2 ? shuffled.size() : std::clamp<std::size_t>(cut, 1, shuffled.size() - 1);
      for (std::size_t k = 0; k < shuffled.size(); ++k) {
        auto& side = k < cut ? split.train : split.validation;
        side.insert(side.end(), shuffled[k]->begin(), shuffled[k]->end());
      }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::size_t train_count[2] = {0, 0}, val_count[2] = {0, 0};
    for (auto i : split.train) train_count[labels[i]] += 1;
    for (auto i : split.validation) val_count[labels[i]] += 1;
    for (int c = 0; c < 2; ++c) {
      if (train_count[c] == 0 || val_count[c] == 0) {
        throw Error(ErrorCode::ClassTooSmall, "groups cannot place class " + std::to_string(c) + " on both sides");
      }
    }
  }
  return plan;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    s.mean = *lo;
    return s;
  }
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

EvaluationReport repeated_eval(const PipelineSpec& spec, const Matrix& x, const Labels& y, const EvalConfig& cfg,
                               const Groups& groups) {
  if (cfg.n_runs == 0) throw Error(ErrorCode::InvalidConfig, "n_runs must be >= 1");
  const auto plan = stratified_shuffle_splits(y, groups, cfg.n_runs, cfg.train_ratio, cfg.seed);
  const auto grid = default_fpr_grid();
  std::vector<RunOutcome> runs(cfg.n_runs);
  parallel_for(cfg.n_runs, [&](std::size_t r) {
    const auto& split = plan.splits[r];
    const auto model = fit(run_spec(spec, r), x.select_rows(split.train), select_labels(y, split.train));
    runs[r] = score_run(model, x.select_rows(split.validation), select_labels(y, split.validation), grid);
  });
  return aggregate(runs, cfg);
}

EvaluationReport repeated_eval(const PipelineSpec& spec, const FeatureMatrix& x, const EvalConfig& cfg) {
  x.check();
  return repeated_eval(spec, x.values, x.labels, cfg, groups_of(x));
}

EvaluationReport holdout_eval(const PipelineSpec& spec, const FeatureMatrix& analysis, const FeatureMatrix& test,
                              const EvalConfig& cfg) {
  analysis.check();
  test.check();
  if (analysis.column_names != test.column_names) {
    throw Error(ErrorCode::ColumnMismatch, "analysis and test matrices have different columns");
  }
  if (cfg.n_runs == 0) throw Error(ErrorCode::InvalidConfig, "n_runs must be >= 1");
  const auto grid = default_fpr_grid();
  std::vector<RunOutcome> runs(cfg.n_runs);
  parallel_for(cfg.n_runs, [&](std::size_t r) {
    const auto model = fit(run_spec(spec, r), analysis.values, analysis.labels, analysis.column_names);
    runs[r] = score_run(model, test.values, test.labels, grid);
  });
  return aggregate(runs, cfg);
}

std::vector<LearningCurvePoint> learning_curve(const PipelineSpec& spec, const Matrix& x, const Labels& y,
                                               std::span<const std::size_t> grid, const EvalConfig& cfg,
                                               const Groups& groups) {
  if (cfg.n_runs == 0) throw Error(ErrorCode::InvalidConfig, "n_runs must be >= 1");
  const auto plan = stratified_shuffle_splits(y, groups, cfg.n_runs, cfg.train_ratio, cfg.seed);
  const std::size_t train_size = plan.splits.front().train.size();
  for (auto m : grid) {
    if (m == 0 || m > train_size) {
      throw Error(ErrorCode::GridExceedsData, "grid size " + std::to_string(m) + " outside [1, " +
                                                  std::to_string(train_size) + "]");
    }
  }

  std::vector<LearningCurvePoint> points;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::size_t m = grid[g];
    std::vector<double> aucs(cfg.n_runs);
    parallel_for(cfg.n_runs, [&](std::size_t r) {
      const auto& split = plan.splits[r];
      std::vector<std::size_t> subset;
      if (m == split.train.size()) {
        subset = split.train;
      } else {
        std::vector<std::size_t> members[2];
        for (auto i : split.train) members[y[i]].push_back(i);
        Rng rng(derive_seed(derive_seed(cfg.seed, "learning_curve"), g * 1000003ULL + r));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int attempt = 0; attempt < 100; ++attempt) {
          const double want = static_cast<double>(m) * static_cast<double>(members[1].size()) /
                              static_cast<double>(split.train.size());
          std::size_t n_pos = static_cast<std::size_t>(std::floor(want)) + (unit(rng) < want - std::floor(want) ? 1 : 0);
          n_pos = std::min(n_pos, members[1].size());
          const std::size_t n_neg = std::min(m - n_pos, members[0].size());
          n_pos = m - n_neg;
          if (n_pos == 0 || n_neg == 0) continue;
          subset.clear();
          for (int c = 0; c < 2; ++c) {
            auto pool = members[c];
            std::shuffle(pool.begin(), pool.end(), rng);
            subset.insert(subset.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(c ? n_pos : n_neg));
          }
          std::sort(subset.begin(), subset.end());
          break;
        }
      }
      if (subset.empty()) {
        aucs[r] = 0.5;
        return;
      }
      const auto model = fit(run_spec(spec, r), x.select_rows(subset), select_labels(y, subset));
      aucs[r] = roc_auc(model.predict_score(x.select_rows(split.validation)), select_labels(y, split.validation));
    });
    const auto s = summarize(aucs);
    points.push_back({m, s.mean, s.std});
  }
  return points;
}

std::vector<LearningCurvePoint> learning_curve(const PipelineSpec& spec, const FeatureMatrix& x,
                                               std::span<const std::size_t> grid, const EvalConfig& cfg) {
  x.check();
  return learning_curve(spec, x.values, x.labels, grid, cfg, groups_of(x));
}

BaselineReport threshold_baseline(std::span<const double> scalar, const Labels& y, const EvalConfig& cfg,
                                  const Groups& groups) {
  if (scalar.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "scalar and labels differ in length");
  if (cfg.n_runs == 0) throw Error(ErrorCode::InvalidConfig, "n_runs must be >= 1");
  const auto plan = stratified_shuffle_splits(y, groups, cfg.n_runs, cfg.train_ratio, cfg.seed);
  std::vector<double> accs(cfg.n_runs);
  for (std::size_t r = 0; r < cfg.n_runs; ++r) {
    const auto& split = plan.splits[r];
    std::vector<double> values;
    for (auto i : split.train) values.push_back(scalar[i]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> candidates{-std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k + 1 < values.size(); ++k) candidates.push_back(0.5 * (values[k] + values[k + 1]));

    auto predict = [](double v, double t, bool above) { return (v > t) == above ? 1 : 0; };
    double best_acc = -1.0, best_t = 0.0;
    bool best_above = true;
    for (double t : candidates) {
      for (bool above : {true, false}) {
        std::size_t hits = 0;
        for (auto i : split.train) hits += predict(scalar[i], t, above) == y[i];
        const double acc = static_cast<double>(hits) / static_cast<double>(split.train.size());
        if (acc > best_acc) {
          best_acc = acc;
          best_t = t;
          best_above = above;
        }
      }
    }
    std::size_t hits = 0;
    for (auto i : split.validation) hits += predict(scalar[i], best_t, best_above) == y[i];
    accs[r] = static_cast<double>(hits) / static_cast<double>(split.validation.size());
  }
  return {summarize(accs), cfg.n_runs};
}

void write_summary_csv(std::ostream& out, const EvaluationReport& report) {
  out << "metric,mean,std,n_runs\n";
  out << "accuracy," << format_double(report.accuracy.mean) << ',' << format_double(report.accuracy.std) << ','
      << report.n_runs << '\n';
  out << "roc_auc," << format_double(report.roc_auc.mean) << ',' << format_double(report.roc_auc.std) << ','
      << report.n_runs << '\n';
}

void write_curve_csv(std::ostream& out, const EvaluationReport& report) {
  out << "fpr,mean_tpr,std_tpr\n";
  for (std::size_t i = 0; i < report.fpr_grid.size(); ++i) {
    out << format_double(report.fpr_grid[i]) << ',' << format_double(report.mean_tpr[i]) << ','
        << format_double(report.std_tpr[i]) << '\n';
  }
}

void write_learning_curve_csv(std::ostream& out, std::span<const LearningCurvePoint> points) {
  out << "n_samples,mean_roc_auc,std_roc_auc\n";
  for (const auto& p : points) {
    out << p.n_samples << ',' << format_double(p.mean_roc_auc) << ',' << format_double(p.std_roc_auc) << '\n';
  }
}

void write_baseline_csv(std::ostream& out, const BaselineReport& report) {
  out << "metric,mean,std,n_runs\n";
  out << "accuracy," << format_double(report.accuracy.mean) << ',' << format_double(report.accuracy.std) << ','
      << report.n_runs << '\n';
}

}  // namespace phyto
